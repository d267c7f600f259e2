#pragma once

#include <aggfem/diffusion_law.hpp>
#include <aggfem/geometry.hpp>
#include <aggfem/kernel.hpp>
#include <aggfem/solver.hpp>

#include <nlohmann/json.hpp>

#include <cmath>
#include <functional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace aggfem {

/// Invalid run configuration. what() starts with the dotted field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path.empty() ? what : path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class KernelType { gaussian, zero };
enum class LawType { power, linear, none };
enum class InitialType { box, constant, gaussian };

struct RunConfig {
  Rectangle domain{-4.0, 4.0, -4.0, 4.0};
  int n_square = 120;

  KernelType kernel = KernelType::gaussian;
  double kernel_width = 1.0;

  LawType law = LawType::power;
  double nu = 0.1;
  double m = 3.0;

  InitialType initial = InitialType::box;
  double initial_value = 0.25;  ///< box height, constant value, or gaussian amplitude
  Rectangle initial_box{-3.0, 3.0, -3.0, 3.0};
  Vec2 initial_center{0.0, 0.0};
  double initial_width = 1.0;

  TimeStepConfig time = [] {
    TimeStepConfig t;
    t.snapshot_times = {2.5, 5.0, 7.5, 10.0, 12.5, 15.0};
    return t;
  }();

  std::string output_dir = "out";
};

namespace detail {

using nlohmann::json;

class Section {
 public:
  Section(const json& node, std::string path, std::set<std::string> allowed)
      : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_, "expected an object");
    for (const auto& [key, value] : node_.items()) {
      if (!allowed.count(key)) throw ConfigError(join(key), "unknown key");
    }
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  const json& child(const std::string& key) const { return node_.at(key); }

  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void read(const std::string& key, double& out) const {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_number()) throw ConfigError(join(key), "expected a number");
    out = v.get<double>();
    if (!std::isfinite(out)) throw ConfigError(join(key), "must be finite");
  }

  void read(const std::string& key, int& out) const {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_number_integer()) throw ConfigError(join(key), "expected an integer");
    out = v.get<int>();
  }

  void read(const std::string& key, bool& out) const {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_boolean()) throw ConfigError(join(key), "expected true or false");
    out = v.get<bool>();
  }

  void read(const std::string& key, std::string& out) const {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_string()) throw ConfigError(join(key), "expected a string");
    out = v.get<std::string>();
  }

  void read(const std::string& key, std::vector<double>& out) const {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_array()) throw ConfigError(join(key), "expected an array of numbers");
    out.clear();
    for (const json& x : v) {
      if (!x.is_number()) throw ConfigError(join(key), "expected an array of numbers");
      out.push_back(x.get<double>());
    }
  }

  void read(const std::string& key, Rectangle& out) const {
    if (!has(key)) return;
    Section s(node_.at(key), join(key), {"x_min", "x_max", "y_min", "y_max"});
    s.read("x_min", out.x_min);
    s.read("x_max", out.x_max);
    s.read("y_min", out.y_min);
    s.read("y_max", out.y_max);
  }

 private:
  const json& node_;
  std::string path_;
};

template <class Enum>
Enum parse_enum(const Section& s, const std::string& key, Enum fallback,
                std::initializer_list<std::pair<const char*, Enum>> names) {
  std::string text;
  s.read(key, text);
  if (text.empty() && !s.has(key)) return fallback;
  for (const auto& [name, value] : names) {
    if (text == name) return value;
  }
  std::string allowed;
  for (const auto& [name, value] : names) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
  throw ConfigError(s.join(key), "unknown value '" + text + "' (expected one of: " + allowed + ")");
}

}  // namespace detail

/// Parses a JSON document (comments allowed) into a validated RunConfig.
/// Missing keys keep their defaults; an empty document is the default run.
inline RunConfig parse_config(const std::string& text) {
  using detail::json;
  using detail::Section;

  json doc;
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    doc = json::object();
  } else {
    try {
      doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
      throw ConfigError("", std::string("parse error: ") + e.what());
    }
  }

  RunConfig c;
  const Section root(doc, "", {"domain", "mesh", "kernel", "law", "initial", "time", "output", "threads"});
  root.read("domain", c.domain);
  if (root.has("mesh")) {
    Section s(root.child("mesh"), "mesh", {"n_square"});
    s.read("n_square", c.n_square);
  }
  if (root.has("kernel")) {
    Section s(root.child("kernel"), "kernel", {"type", "width"});
    c.kernel = detail::parse_enum(s, "type", c.kernel,
                                  {{"gaussian", KernelType::gaussian}, {"zero", KernelType::zero}});
    s.read("width", c.kernel_width);
  }
  if (root.has("law")) {
    Section s(root.child("law"), "law", {"type", "nu", "m"});
    c.law = detail::parse_enum(s, "type", c.law,
                               {{"power", LawType::power}, {"linear", LawType::linear}, {"none", LawType::none}});
    s.read("nu", c.nu);
    s.read("m", c.m);
  }
  if (root.has("initial")) {
    Section s(root.child("initial"), "initial", {"type", "value", "box", "center", "width"});
    c.initial = detail::parse_enum(
        s, "type", c.initial,
        {{"box", InitialType::box}, {"constant", InitialType::constant}, {"gaussian", InitialType::gaussian}});
    s.read("value", c.initial_value);
    s.read("box", c.initial_box);
    if (s.has("center")) {
      std::vector<double> center;
      s.read("center", center);
      if (center.size() != 2) throw ConfigError("initial.center", "expected [x, y]");
      c.initial_center = {center[0], center[1]};
    }
    s.read("width", c.initial_width);
  }
  if (root.has("time")) {
    Section s(root.child("time"), "time",
              {"k", "gamma", "T_final", "fp_tol", "fp_max_iters", "lin_tol", "truncate_in_convolution",
               "truncate_in_diffusion", "direct_solve_below"});
    s.read("k", c.time.k);
    s.read("gamma", c.time.gamma);
    s.read("T_final", c.time.T_final);
    s.read("fp_tol", c.time.fp_tol);
    s.read("fp_max_iters", c.time.fp_max_iters);
    s.read("lin_tol", c.time.lin_tol);
    s.read("truncate_in_convolution", c.time.truncate_in_convolution);
    s.read("truncate_in_diffusion", c.time.truncate_in_diffusion);
    s.read("direct_solve_below", c.time.direct_solve_below);
  }
  if (root.has("output")) {
    Section s(root.child("output"), "output", {"dir", "snapshot_every", "snapshot_times"});
    s.read("dir", c.output_dir);
    s.read("snapshot_every", c.time.snapshot_every);
    s.read("snapshot_times", c.time.snapshot_times);
  }
  root.read("threads", c.time.workers);

  // Validation.
  if (!(c.domain.width() > 0.0) || !(c.domain.height() > 0.0)) {
    throw ConfigError("domain", "must have positive width and height");
  }
  if (c.n_square < 1) throw ConfigError("mesh.n_square", "must be >= 1");
  if (!(c.kernel_width > 0.0)) throw ConfigError("kernel.width", "must be > 0");
  if (c.law == LawType::power) {
    if (!(c.nu >= 0.0)) throw ConfigError("law.nu", "must be >= 0");
    if (!(c.m >= 1.0)) throw ConfigError("law.m", "must be >= 1");
  }
  if (!(c.initial_value >= 0.0)) throw ConfigError("initial.value", "must be >= 0");
  if (!(c.initial_width > 0.0)) throw ConfigError("initial.width", "must be > 0");
  if (c.output_dir.empty()) throw ConfigError("output.dir", "must not be empty");
  try {
    c.time.validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const auto colon = msg.find(':');
    const std::string field = msg.substr(0, colon);
    const std::string section = (field == "snapshot_every") ? "output." : (field == "workers" ? "" : "time.");
    throw ConfigError(section + (field == "workers" ? "threads" : field), msg.substr(colon + 2));
  }
  return c;
}

inline AnyKernel make_kernel(const RunConfig& c) {
  if (c.kernel == KernelType::zero) return ZeroKernel{};
  return GaussianKernel(c.kernel_width);
}

inline DiffusionLaw make_law(const RunConfig& c) {
  switch (c.law) {
    case LawType::power:
      return DiffusionLaw::power_law(c.nu, c.m);
    case LawType::linear:
      return DiffusionLaw::linear();
    case LawType::none:
      break;
  }
  return DiffusionLaw::none();
}

inline std::function<double(Vec2)> make_initial_function(const RunConfig& c) {
  switch (c.initial) {
    case InitialType::box:
      return box_function(c.initial_box, c.initial_value);
    case InitialType::constant:
      return [v = c.initial_value](Vec2) { return v; };
    case InitialType::gaussian:
      break;
  }
  return [a = c.initial_value, x0 = c.initial_center, w = c.initial_width](Vec2 p) {
    const Vec2 d = p - x0;
    return a * std::exp(-dot(d, d) / (w * w));
  };
}

}  // namespace aggfem
