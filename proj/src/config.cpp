#include "dsic/config.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "dsic/error.hpp"

namespace dsic {

Connector parse_connector(const std::string& s) {
  if (s == "fpn") return Connector::Fpn;
  if (s == "fc_fpn") return Connector::FcFpn;
  if (s == "dsic") return Connector::Dsic;
  if (s == "dsic_inside_fpn") return Connector::DsicInsideFpn;
  if (s == "dsic_after_fpn") return Connector::DsicAfterFpn;
  throw ConfigError("unknown connector: " + s);
}

std::string connector_name(Connector c) {
  switch (c) {
    case Connector::Fpn: return "fpn";
    case Connector::FcFpn: return "fc_fpn";
    case Connector::Dsic: return "dsic";
    case Connector::DsicInsideFpn: return "dsic_inside_fpn";
    case Connector::DsicAfterFpn: return "dsic_after_fpn";
  }
  return "?";
}

void RunConfig::validate() const {
  parse_connector(connector);
  auto check_mode = [](const std::string& m, const char* which) {
    if (m != "tanh" && m != "sigmoid" && m != "softmax") {
      throw ConfigError(std::string(which) + ": unknown gate mode " + m);
    }
  };
  check_mode(isg_mode, "isg_mode");
  check_mode(csg_mode, "csg_mode");
  if (placement != "signal" && placement != "outer") {
    throw ConfigError("placement must be signal or outer");
  }
  if (placement == "outer" && (isg_mode == "softmax" || csg_mode == "softmax")) {
    throw ConfigError("softmax mode squashes a signal group and cannot use outer placement");
  }
  if (sampling_stride != 1 && sampling_stride != 2) {
    throw ConfigError("sampling_stride must be 1 or 2");
  }
  if (channels < 1) throw ConfigError("channels must be positive");
  if (image_size < 32 || (image_size & (image_size - 1)) != 0) {
    throw ConfigError("image_size must be a power of two >= 32");
  }
  for (int b : blocks) {
    if (b < 1 || b > 4) throw ConfigError("blocks entries must be in 1..4");
  }
  if (steps < 0) throw ConfigError("steps must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (lr <= 0.0) throw ConfigError("lr must be positive");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (val_samples < 1) throw ConfigError("val_samples must be >= 1");
  if (blobs_min < 1 || blobs_max < blobs_min) throw ConfigError("bad blob count range");
  if (gate_init != "default" && gate_init != "zero") {
    throw ConfigError("gate_init must be default or zero");
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int parse_int(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const int r = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ParseError("config: bad integer for " + key + ": '" + v + "'");
  }
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ParseError("config: bad number for " + key + ": '" + v + "'");
  }
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw ParseError("config: bad boolean for " + key + ": '" + v + "'");
}

std::array<int, 4> parse_blocks(const std::string& v) {
  std::array<int, 4> out{};
  std::stringstream ss(v);
  std::string item;
  std::vector<int> parts;
  while (std::getline(ss, item, ',')) parts.push_back(parse_int(trim(item), "blocks"));
  if (parts.size() == 1) {
    out.fill(parts[0]);
  } else if (parts.size() == 4) {
    for (int i = 0; i < 4; ++i) out[static_cast<std::size_t>(i)] = parts[static_cast<std::size_t>(i)];
  } else {
    throw ParseError("config: blocks expects 1 or 4 comma-separated integers");
  }
  return out;
}

}  // namespace

RunConfig parse_config(std::istream& is) {
  RunConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "connector") config.connector = value;
    else if (key == "isg") config.isg = parse_bool(value, key);
    else if (key == "isg_mode") config.isg_mode = value;
    else if (key == "csg_mode") config.csg_mode = value;
    else if (key == "placement") config.placement = value;
    else if (key == "sampling_stride") config.sampling_stride = parse_int(value, key);
    else if (key == "fine_selection") config.fine_selection = parse_bool(value, key);
    else if (key == "fpn_smoothing") config.fpn_smoothing = parse_bool(value, key);
    else if (key == "channels") config.channels = parse_int(value, key);
    else if (key == "image_size") config.image_size = parse_int(value, key);
    else if (key == "blocks") config.blocks = parse_blocks(value);
    else if (key == "seed") {
      try {
        std::size_t pos = 0;
        config.seed = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        throw ParseError("config: bad integer for seed: '" + value + "'");
      }
    }
    else if (key == "steps") config.steps = parse_int(value, key);
    else if (key == "batch_size") config.batch_size = parse_int(value, key);
    else if (key == "lr") config.lr = parse_double(value, key);
    else if (key == "workers") config.workers = parse_int(value, key);
    else if (key == "val_samples") config.val_samples = parse_int(value, key);
    else if (key == "blobs_min") config.blobs_min = parse_int(value, key);
    else if (key == "blobs_max") config.blobs_max = parse_int(value, key);
    else if (key == "gate_init") config.gate_init = value;
    else if (key == "out") config.out = value;
    else throw ParseError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open config: " + path);
  return parse_config(is);
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  os << "connector = " << c.connector << "\n";
  os << "isg = " << (c.isg ? "on" : "off") << "\n";
  os << "isg_mode = " << c.isg_mode << "\n";
  os << "csg_mode = " << c.csg_mode << "\n";
  os << "placement = " << c.placement << "\n";
  os << "sampling_stride = " << c.sampling_stride << "\n";
  os << "fine_selection = " << (c.fine_selection ? "on" : "off") << "\n";
  os << "fpn_smoothing = " << (c.fpn_smoothing ? "on" : "off") << "\n";
  os << "channels = " << c.channels << "\n";
  os << "image_size = " << c.image_size << "\n";
  os << "blocks = " << c.blocks[0] << "," << c.blocks[1] << "," << c.blocks[2] << ","
     << c.blocks[3] << "\n";
  os << "seed = " << c.seed << "\n";
  os << "steps = " << c.steps << "\n";
  os << "batch_size = " << c.batch_size << "\n";
  char lr_buf[32];
  std::snprintf(lr_buf, sizeof(lr_buf), "%.17g", c.lr);
  os << "lr = " << lr_buf << "\n";
  os << "workers = " << c.workers << "\n";
  os << "val_samples = " << c.val_samples << "\n";
  os << "blobs_min = " << c.blobs_min << "\n";
  os << "blobs_max = " << c.blobs_max << "\n";
  os << "gate_init = " << c.gate_init << "\n";
  os << "out = " << c.out << "\n";
  return os.str();
}

}  // namespace dsic
