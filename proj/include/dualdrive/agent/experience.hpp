#pragma once

#include <shared_mutex>
#include <string>
#include <vector>

#include "dualdrive/agent/meta_action.hpp"
#include "dualdrive/perception/scene.hpp"
#include "dualdrive/token.hpp"

namespace dd::agent {

// Cosine similarity between two tokens; throws on zero vectors or a size
// mismatch.
double cosine(const SceneToken& a, const SceneToken& b);

enum class Provenance { analytic, reflection };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct CreatedAt {
    long episode = 0;
    long tick = 0;
};

// One remembered decision: the retrieval token, the structured scene, the
// reasoning text, and the action taken.
struct Experience {
    SceneToken token;
    perception::SceneDescription description;
    std::string reasoning;
    MetaAction decision = MetaAction::IDLE;
    Provenance provenance = Provenance::analytic;
    bool reflection_fallback = false;
    CreatedAt created_at;
};

struct RetrievedExperience {
    Experience experience;
    double similarity = 0.0;
    std::size_t bank_index = 0;
};

// Append-only store of experiences. Insertion order is preserved; readers
// may scan concurrently while inserts take the exclusive lock.
class MemoryBank {
public:
    MemoryBank() = default;
    MemoryBank(const MemoryBank& other);
    MemoryBank& operator=(const MemoryBank& other);

    void insert(Experience exp);
    std::size_t size() const;
    Experience at(std::size_t index) const;
    std::vector<Experience> all() const;

    // Top-k by cosine over the full token, ties broken by earliest insertion.
    std::vector<RetrievedExperience> retrieve_topk(const SceneToken& query, int k) const;

    // Removes exact-duplicate (token, decision) pairs keeping the newest and
    // drops experiences whose decision violates the hard traffic rules.
    // Returns the number of experiences removed.
    std::size_t revise();

    void persist(const std::string& path) const;
    static MemoryBank load(const std::string& path);
    // Skips corrupt lines instead of throwing; reports how many were skipped.
    static MemoryBank load_lenient(const std::string& path, std::size_t* skipped);

    // Seeded uniform subsample without replacement, insertion order kept.
    MemoryBank subsample(std::size_t count, unsigned long seed) const;

private:
    mutable std::shared_mutex mutex_;
    std::vector<Experience> experiences_;
};

// True when the experience breaks a hard rule (audited by revise), e.g. AC
// while the nearest critical object is a red light or a close lead vehicle.
bool violates_hard_rules(const Experience& exp);

}  // namespace dd::agent
