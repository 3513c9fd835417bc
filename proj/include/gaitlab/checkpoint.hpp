#ifndef GAITLAB_CHECKPOINT_HPP
#define GAITLAB_CHECKPOINT_HPP

#include "gaitlab/model.hpp"

#include <filesystem>
#include <string>

namespace gaitlab {

inline constexpr int kCheckpointFormatVersion = 1;

// {"format_version": 1, "input_dim": D, "hidden": H,
//  "tensors": [{"name": ..., "shape": [rows, cols], "data": [row-major values]}, ...]}
std::string checkpoint_to_json(const ModelParams<double>& params);
ModelParams<double> checkpoint_from_json(const std::string& text);

void save_checkpoint(const ModelParams<double>& params, const std::filesystem::path& path);
ModelParams<double> load_checkpoint(const std::filesystem::path& path);

}  // namespace gaitlab

#endif  // GAITLAB_CHECKPOINT_HPP
