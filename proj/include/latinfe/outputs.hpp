#pragma once

#include "latinfe/scenarios.hpp"

namespace latinfe {

// Writes curve.csv, convergence.jsonl, events.jsonl and run.json into the
// configured output directory. Byte-deterministic for deterministic runs
// (timing lives only in the JSONL records). Returns the written paths.
std::vector<std::string> write_outputs(const ArtifactBundle& bundle,
                                       const std::string& directory);

std::string curve_csv(const ArtifactBundle& bundle);

}  // namespace latinfe
