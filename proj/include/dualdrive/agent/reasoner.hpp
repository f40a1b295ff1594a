#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "dualdrive/agent/experience.hpp"
#include "dualdrive/agent/history.hpp"
#include "dualdrive/agent/meta_action.hpp"
#include "dualdrive/perception/scene.hpp"
#include "dualdrive/sim/world.hpp"

namespace dd::agent {

struct Decision {
    std::string reasoning;
    MetaAction action = MetaAction::IDLE;
};

// Typed failure for backend errors; carries the raw model output when the
// failure was an unparsable response.
class BackendError : public std::runtime_error {
public:
    BackendError(const std::string& what, std::string raw = {})
        : std::runtime_error(what), raw_output(std::move(raw)) {}
    std::string raw_output;
};

struct FewShot {
    perception::SceneDescription description;
    std::string reasoning;
    MetaAction decision = MetaAction::IDLE;
    double similarity = 0.0;
    Provenance provenance = Provenance::analytic;
};

struct DecisionRequest {
    std::string traffic_rules;
    perception::SceneDescription description;
    NavigationHint navigation;
    EgoInfo ego;
    std::vector<FewShot> shots;  // ordered by similarity, best first
    std::string prompt_text;     // assembled chat context
};

struct ReflectionRequest {
    std::string reflection_prompt;
    sim::AccidentInfo accident;
    std::vector<HistoryRecord> queue;  // oldest first, non-empty
};

struct ReflectionFinding {
    std::size_t step_index = 0;  // into the queue
    std::string reasoning;
    MetaAction corrected = MetaAction::DC;
    bool fallback = false;  // no disagreeing step found; policy default used
};

// Decision/reflection backend seam. RuleOracle and NaiveOracle are built-in
// deterministic tables; ExternalChatBackend talks to a chat endpoint.
class ReasonerBackend {
public:
    virtual ~ReasonerBackend() = default;
    virtual std::string name() const = 0;
    virtual Decision decide(const DecisionRequest& request) = 0;
    virtual ReflectionFinding reflect(const ReflectionRequest& request) = 0;
};

// Deterministic decision tables. When the best shot is a near-identical
// scene (similarity >= override threshold) its remembered decision is
// followed instead of the table, which is how retrieved experience steers
// these backends.
class RuleBackendBase : public ReasonerBackend {
public:
    explicit RuleBackendBase(double override_similarity = 0.9999)
        : override_similarity_(override_similarity) {}

    Decision decide(const DecisionRequest& request) final;
    ReflectionFinding reflect(const ReflectionRequest& request) final;

protected:
    virtual Decision table_decide(const perception::SceneDescription& description,
                                  const NavigationHint& navigation, const EgoInfo& ego) const = 0;

private:
    double override_similarity_;
};

// Full table: red lights / stop signs / crossing pedestrians -> STOP,
// lead time-to-contact or gap -> DC, navigation-requested lane changes with
// gap checks, AC below target on a clear road, else IDLE.
class RuleOracle : public RuleBackendBase {
public:
    using RuleBackendBase::RuleBackendBase;
    std::string name() const override { return "rule"; }

protected:
    Decision table_decide(const perception::SceneDescription& description,
                          const NavigationHint& navigation, const EgoInfo& ego) const override;
};

// Short-sighted variant of the table: it only reacts to hazards a few meters
// out and never anticipates time-to-contact. Stands in for an untrained
// fast reasoner.
class NaiveOracle : public RuleBackendBase {
public:
    using RuleBackendBase::RuleBackendBase;
    std::string name() const override { return "naive"; }

protected:
    Decision table_decide(const perception::SceneDescription& description,
                          const NavigationHint& navigation, const EgoInfo& ego) const override;
};

// Builds the chat context: rules, then each shot (scene / reasoning /
// decision), then the current scene, navigation and ego state.
std::string assemble_context(const std::string& traffic_rules, const std::vector<FewShot>& shots,
                             const perception::SceneDescription& description,
                             const NavigationHint& navigation, const EgoInfo& ego);

// Extracts (reasoning, action) from backend text ending in "Decision: X".
// Throws BackendError carrying the raw text when no valid action is found.
Decision parse_decision(const std::string& text);

// Algorithm-level operations used by the episode loop.
Decision analytic_decide(ReasonerBackend& backend, const std::string& traffic_rules,
                         const perception::SceneDescription& description,
                         const NavigationHint& navigation, const EgoInfo& ego);

Decision heuristic_decide(ReasonerBackend& backend, const std::string& traffic_rules,
                          const std::vector<FewShot>& shots,
                          const perception::SceneDescription& description,
                          const NavigationHint& navigation, const EgoInfo& ego);

std::unique_ptr<ReasonerBackend> make_backend(const std::string& name);

}  // namespace dd::agent
