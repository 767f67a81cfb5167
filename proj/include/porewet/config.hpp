#pragma once

#include "porewet/error.hpp"
#include "porewet/pipeline.hpp"
#include "porewet/wetmap.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace porewet {

class ConfigError : public ParameterError {
public:
  using ParameterError::ParameterError;
};

struct PipelineConfig {
  std::filesystem::path input;        ///< labelled volume (.raw with sidecar)
  std::filesystem::path output_dir{"."};
  std::filesystem::path measurements; ///< map: per-node CSV from measure
  std::filesystem::path summary;      ///< map: per-path CSV from measure
  MeasureParams measure;
  MapParams map;
  int threads = 0;                    ///< 0 = automatic
  bool write_meshes = true;

  void validate() const;
};

/// Every recognised key as "section.name".
std::vector<std::string> config_keys();

/// Sets one key from its text form. Throws ConfigError for unknown keys or
/// values that do not parse.
void apply_setting(PipelineConfig& cfg, std::string_view key, std::string_view value);
/// "section.name=value"
void apply_override(PipelineConfig& cfg, std::string_view assignment);

/// Reads `[section]` headers and `name = value` lines; `#` starts a comment.
/// Values may be numbers, true/false, or strings (quoted or bare).
PipelineConfig parse_config(std::string_view text, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& file, PipelineConfig base = {});

/// Serialised form accepted by parse_config; stable key order.
std::string dump_config(const PipelineConfig& cfg);

} // namespace porewet
