#include "dualdrive/agent/reflection.hpp"

namespace dd::agent {

Experience reflect(ReasonerBackend& backend, const std::string& reflection_prompt,
                   const sim::AccidentInfo& accident, const HistoryQueue& queue) {
    if (queue.empty()) throw BackendError("reflect: history queue is empty");

    ReflectionRequest req;
    req.reflection_prompt = reflection_prompt;
    req.accident = accident;
    req.queue.assign(queue.records().begin(), queue.records().end());

    ReflectionFinding finding = backend.reflect(req);
    const HistoryRecord& step = queue.at(finding.step_index);
    if (!finding.fallback && finding.corrected == step.decision) {
        finding.fallback = true;  // contract: differ from the original or be flagged
    }

    Experience exp;
    exp.token = step.token;
    exp.description = step.description;
    exp.reasoning = finding.reasoning;
    exp.decision = finding.corrected;
    exp.provenance = Provenance::reflection;
    exp.reflection_fallback = finding.fallback;
    exp.created_at.tick = step.tick;
    return exp;
}

}  // namespace dd::agent
