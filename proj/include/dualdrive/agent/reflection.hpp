#pragma once

#include "dualdrive/agent/experience.hpp"
#include "dualdrive/agent/history.hpp"
#include "dualdrive/agent/reasoner.hpp"
#include "dualdrive/sim/world.hpp"

namespace dd::agent {

// Post-accident analysis: finds the erroneous step in the history queue and
// returns a corrected Experience reusing that step's token and description.
// The corrected decision always differs from the original one, or the
// experience is flagged as a fallback correction. Throws BackendError when
// the queue is empty.
Experience reflect(ReasonerBackend& backend, const std::string& reflection_prompt,
                   const sim::AccidentInfo& accident, const HistoryQueue& queue);

}  // namespace dd::agent
