#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>

namespace dsic {

enum class Connector { Fpn, FcFpn, Dsic, DsicInsideFpn, DsicAfterFpn };

Connector parse_connector(const std::string& s);
std::string connector_name(Connector c);

// Experiment description. Defaults reproduce the reference configuration:
// full gated connector, tanh gates in both modules, signal placement,
// sampling stride 1, fine selection on.
struct RunConfig {
  std::string connector = "dsic";
  bool isg = true;
  std::string isg_mode = "tanh";
  std::string csg_mode = "tanh";
  std::string placement = "signal";  // signal | outer
  int sampling_stride = 1;
  bool fine_selection = true;
  // conventional post-merge 3x3 smoothing for trained top-down baselines;
  // equivalence oracles construct their own smoothing-free reference
  bool fpn_smoothing = true;
  int channels = 32;  // pyramid width d
  int image_size = 64;
  std::array<int, 4> blocks = {3, 3, 3, 3};
  std::uint64_t seed = 1;
  int steps = 2000;
  int batch_size = 2;
  double lr = 0.01;
  int workers = 1;
  int val_samples = 100;
  int blobs_min = 1;
  int blobs_max = 4;
  std::string gate_init = "default";  // default | zero (test hook)
  std::string out = "runs/out";

  bool operator==(const RunConfig&) const = default;

  // throws ConfigError when fields are individually valid but semantically
  // wrong (unknown enum value, impossible combination)
  void validate() const;
};

// Flat key = value format, one key per line, '#' comments. Unknown keys and
// malformed values raise ParseError; semantic violations raise ConfigError.
RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

}  // namespace dsic
