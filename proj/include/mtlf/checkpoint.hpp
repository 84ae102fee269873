#pragma once

#include "mtlf/rdlstm.hpp"
#include "mtlf/seasonal.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace mtlf {

// A frozen network plus the seasonal states trained with it.
//
// JSON layout:
//   { "format": "mtlf-checkpoint-v1", "state_size": m, "seed": s,
//     "layout": { "dilations": [..4], "residual": [..4] },
//     "hyperparameters": { "<key>": "<value>", ... },
//     "params":   [ { "tag", "rows", "cols", "values": [...] }, ... ],
//     "seasonal": [ { "series_id", "initial_components": [..12], "beta_raw" }, ... ] }
// Params are listed in RdLstmNetwork::params() order; values are row-major.
struct Checkpoint {
    rdlstm::RdLstmNetwork network;
    std::vector<seasonal::SeasonalState> seasons;
    std::map<std::string, std::string> hyperparameters;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
// Throws DataError on malformed input or shape mismatch.
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace mtlf
