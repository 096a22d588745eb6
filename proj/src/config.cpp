#include "bfkit/config.hpp"

#include <algorithm>
#include <fstream>
#include <type_traits>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace bfkit {
namespace {

using nlohmann::json;

// Reads one section, recording a problem per bad key instead of stopping.
class SectionReader {
 public:
  SectionReader(const json& root, std::string section, std::vector<std::string>& problems)
      : section_(std::move(section)), problems_(problems) {
    if (!root.contains(section_)) return;
    const json& node = root.at(section_);
    if (!node.is_object()) {
      problems_.push_back(section_ + ": must be an object");
      return;
    }
    node_ = &node;
  }

  template <typename T>
  void read(const std::string& key, T& target) {
    seen_.push_back(key);
    if (node_ == nullptr || !node_->contains(key)) return;
    const json& value = node_->at(key);
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (value.is_number() && !value.is_number_unsigned()) {
        problems_.push_back(section_ + "." + key + ": must be a non-negative integer");
        return;
      }
    }
    try {
      target = value.get<T>();
    } catch (const json::exception&) {
      problems_.push_back(section_ + "." + key + ": wrong type");
    }
  }

  template <typename T, typename Parse>
  void read_enum(const std::string& key, T& target, Parse parse) {
    std::string name;
    const bool present = node_ != nullptr && node_->contains(key);
    read(key, name);
    if (!present || name.empty()) return;
    try {
      target = parse(name);
    } catch (const Error&) {
      problems_.push_back(section_ + "." + key + ": unknown value '" + name + "'");
    }
  }

  void reject_unknown() {
    if (node_ == nullptr) return;
    for (const auto& [key, value] : node_->items()) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
        problems_.push_back(section_ + "." + key + ": unknown key");
      }
    }
  }

 private:
  std::string section_;
  std::vector<std::string>& problems_;
  const json* node_ = nullptr;
  std::vector<std::string> seen_;
};

void check(bool ok, const std::string& message, std::vector<std::string>& problems) {
  if (!ok) problems.push_back(message);
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be a JSON object");

  RunConfig cfg;
  SolverConfig& s = cfg.solver;
  std::vector<std::string> problems;

  for (const auto& [key, value] : root.items()) {
    static const char* known[] = {"solver", "kernel", "mask", "tv", "io", "seed"};
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      problems.push_back(key + ": unknown key");
    }
  }

  SectionReader solver(root, "solver", problems);
  solver.read("clusters", s.clusters);
  solver.read("fuzziness", s.fuzziness);
  solver.read("max_iters", s.max_iters);
  solver.read("tol", s.tol);
  solver.read("epsilon", s.epsilon);
  solver.read("jitter", s.jitter);
  solver.read_enum("membership_mode", s.membership_mode, parse_membership_mode);
  solver.read_enum("center_convention", s.center_convention, parse_center_convention);
  solver.reject_unknown();

  SectionReader kernel(root, "kernel", problems);
  kernel.read("size", s.kernel_size);
  kernel.read("sigma", s.kernel_sigma);
  kernel.reject_unknown();

  SectionReader mask(root, "mask", problems);
  mask.read("levels", cfg.mask_levels);
  mask.read("bins", cfg.mask_bins);
  mask.reject_unknown();

  SectionReader tv(root, "tv", problems);
  tv.read("enabled", s.tv_enabled);
  tv.read_enum("variant", s.tv_variant, parse_tv_variant);
  tv.read("steps", s.tv_steps);
  tv.read("step_size", s.tv_step_size);
  tv.reject_unknown();

  SectionReader io(root, "io", problems);
  io.read_enum("format", cfg.format, parse_image_format);
  io.read("output_dir", cfg.output_dir);
  io.reject_unknown();

  if (root.contains("seed")) {
    if (root.at("seed").is_number_unsigned()) {
      cfg.seed = root.at("seed").get<std::uint64_t>();
    } else {
      problems.push_back("seed: must be a non-negative integer");
    }
  }
  s.seed = cfg.seed;

  check(s.clusters >= 2, "solver.clusters: must be >= 2", problems);
  check(s.fuzziness > 1.0, "solver.fuzziness: must be > 1", problems);
  check(s.tol > 0.0, "solver.tol: must be > 0", problems);
  check(s.epsilon > 0.0, "solver.epsilon: must be > 0", problems);
  check(s.kernel_size >= 3 && s.kernel_size % 2 == 1, "kernel.size: must be odd and >= 3", problems);
  check(s.kernel_sigma > 0.0, "kernel.sigma: must be > 0", problems);
  check(s.kernel_size <= 4.0 * s.kernel_sigma + 1.0, "kernel.size: must be <= 4*sigma+1", problems);
  check(cfg.mask_levels >= 1, "mask.levels: must be >= 1", problems);
  check(cfg.mask_bins >= cfg.mask_levels + 1, "mask.bins: must be >= levels+1", problems);
  check(s.tv_step_size >= 0.0, "tv.step_size: must be >= 0", problems);

  if (!problems.empty()) {
    std::string msg = "invalid config:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

std::string dump_run_config(const RunConfig& cfg) {
  const SolverConfig& s = cfg.solver;
  json root;
  root["solver"] = {{"clusters", s.clusters},
                    {"fuzziness", s.fuzziness},
                    {"max_iters", s.max_iters},
                    {"tol", s.tol},
                    {"epsilon", s.epsilon},
                    {"jitter", s.jitter},
                    {"membership_mode", std::string(to_string(s.membership_mode))},
                    {"center_convention", std::string(to_string(s.center_convention))}};
  root["kernel"] = {{"size", s.kernel_size}, {"sigma", s.kernel_sigma}};
  root["mask"] = {{"levels", cfg.mask_levels}, {"bins", cfg.mask_bins}};
  root["tv"] = {{"enabled", s.tv_enabled},
                {"variant", std::string(to_string(s.tv_variant))},
                {"steps", s.tv_steps},
                {"step_size", s.tv_step_size}};
  root["io"] = {{"format", std::string(format_name(cfg.format))}, {"output_dir", cfg.output_dir}};
  root["seed"] = cfg.seed;
  return root.dump(2) + "\n";
}

}  // namespace bfkit
