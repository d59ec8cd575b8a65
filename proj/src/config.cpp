#include "uaix/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <sstream>

#include "uaix/container.hpp"
#include "uaix/error.hpp"

namespace uaix {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ParseError("empty item in list '" + s + "'");
    out.push_back(item);
  }
  if (out.empty()) throw ParseError("empty list");
  return out;
}

std::uint64_t to_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ParseError("expected a nonnegative integer, got '" + s + "'");
  return v;
}

double to_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) throw ParseError("expected a number, got '" + s + "'");
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ParseError("expected true or false, got '" + s + "'");
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

struct Field {
  const char* section;
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define UAIX_FIELD(section, key, expr, parse, show)                              \
  Field {                                                                         \
    section, key, [](RunConfig& c, const std::string& v) { expr = parse(v); },   \
        [](const RunConfig& c) { return show(expr); }                             \
  }

std::string str(const std::string& s) { return s; }
std::string u64s(std::uint64_t v) { return std::to_string(v); }
std::string bools(bool v) { return v ? "true" : "false"; }
std::size_t to_size(const std::string& s) { return static_cast<std::size_t>(to_u64(s)); }
float to_float(const std::string& s) { return static_cast<float>(to_double(s)); }
unsigned to_unsigned(const std::string& s) { return static_cast<unsigned>(to_u64(s)); }

std::vector<double> to_alphas(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(to_double(item));
  return out;
}
std::string show_alphas(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + num(v[i]);
  return s;
}
std::string show_list(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> f{
      UAIX_FIELD("run", "seed", c.seed, to_u64, u64s),
      UAIX_FIELD("run", "out", c.out, str, str),
      UAIX_FIELD("run", "threads", c.threads, to_unsigned, u64s),
      UAIX_FIELD("data", "train_size", c.train_size, to_size, u64s),
      UAIX_FIELD("data", "image_size", c.synth.image_size, to_size, u64s),
      UAIX_FIELD("data", "channels", c.synth.channels, to_size, u64s),
      UAIX_FIELD("data", "num_classes", c.synth.num_classes, to_size, u64s),
      UAIX_FIELD("data", "area_target", c.synth.area_target, to_double, num),
      UAIX_FIELD("data", "area_min", c.synth.area_min, to_double, num),
      UAIX_FIELD("data", "area_max", c.synth.area_max, to_double, num),
      UAIX_FIELD("net", "arch", c.arch, str, str),
      UAIX_FIELD("net", "hidden", c.hidden, to_size, u64s),
      UAIX_FIELD("net", "conv_dropout", c.conv_dropout, to_float, num),
      UAIX_FIELD("net", "dense_dropout", c.dense_dropout, to_float, num),
      UAIX_FIELD("trainer", "learning_rate", c.trainer.learning_rate, to_double, num),
      UAIX_FIELD("trainer", "momentum", c.trainer.momentum, to_double, num),
      UAIX_FIELD("trainer", "batch_size", c.trainer.batch_size, to_size, u64s),
      UAIX_FIELD("trainer", "epochs", c.trainer.epochs, to_size, u64s),
      UAIX_FIELD("trainer", "lr_step", c.trainer.lr_step, to_size, u64s),
      UAIX_FIELD("trainer", "lr_gamma", c.trainer.lr_gamma, to_double, num),
      UAIX_FIELD("trainer", "weight_decay", c.trainer.weight_decay, to_double, num),
      UAIX_FIELD("trainer", "holdout_fraction", c.trainer.holdout_fraction, to_double, num),
      UAIX_FIELD("posterior", "variant", c.variant, str, str),
      UAIX_FIELD("posterior", "members", c.members, to_size, u64s),
      UAIX_FIELD("posterior", "member_epochs", c.member_epochs, to_size, u64s),
      UAIX_FIELD("posterior", "member_lr_step", c.member_lr_step, to_size, u64s),
      UAIX_FIELD("posterior", "prior_precision", c.prior_precision, to_double, num),
      UAIX_FIELD("posterior", "laplace_examples", c.laplace_examples, to_size, u64s),
      UAIX_FIELD("attribution", "method", c.method, str, str),
      UAIX_FIELD("attribution", "lrp_epsilon", c.lrp_epsilon, to_double, num),
      UAIX_FIELD("attribution", "ig_steps", c.ig_steps, to_size, u64s),
      UAIX_FIELD("uai", "samples", c.samples, to_size, u64s),
      UAIX_FIELD("uai", "alphas", c.alphas, to_alphas, show_alphas),
      UAIX_FIELD("uai", "epsilon", c.epsilon, to_double, num),
      UAIX_FIELD("uai", "literal_less_than", c.literal_less_than, to_bool, bools),
      UAIX_FIELD("uai", "enumerate_members", c.enumerate_members, to_bool, bools),
      UAIX_FIELD("spray", "k_nn", c.spray.k_nn, to_size, u64s),
      UAIX_FIELD("spray", "pool", c.spray.pool, to_size, u64s),
      UAIX_FIELD("spray", "max_k", c.spray.max_k, to_size, u64s),
      UAIX_FIELD("spray", "restarts", c.spray.restarts, to_size, u64s),
      UAIX_FIELD("spray", "samples", c.spray_samples, to_size, u64s),
      UAIX_FIELD("eval", "images", c.test_size, to_size, u64s),
      UAIX_FIELD("eval", "image", c.image, to_size, u64s),
      UAIX_FIELD("eval", "demo_variants", c.demo_variants, split_list, show_list),
  };
  return f;
}

#undef UAIX_FIELD

}  // namespace

ConfigFile parse_config(const std::string& text) {
  ConfigFile file;
  std::string section;
  std::stringstream in(text);
  std::string raw;
  for (std::size_t line_no = 1; std::getline(in, raw); ++line_no) {
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(where + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ParseError(where + "empty section name");
      file[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(where + "expected key = value");
    if (section.empty()) throw ParseError(where + "key outside of any section");
    const std::string k = trim(line.substr(0, eq));
    if (k.empty()) throw ParseError(where + "empty key");
    if (!file[section].emplace(k, trim(line.substr(eq + 1))).second)
      throw ParseError(where + "duplicate key '" + section + "." + k + "'");
  }
  return file;
}

ConfigFile read_config(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_config(std::string(bytes.begin(), bytes.end()));
}

void apply_override(ConfigFile& file, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const std::string lhs = trim(assignment.substr(0, eq));
  const auto dot = lhs.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot == 0 || dot + 1 == lhs.size())
    throw ParseError("override must look like section.key=value, got '" + assignment + "'");
  file[lhs.substr(0, dot)][lhs.substr(dot + 1)] = trim(assignment.substr(eq + 1));
}

RunConfig preset(const std::string& scale) {
  RunConfig c;
  c.trainer.epochs = 8;
  c.trainer.lr_step = 5;
  if (scale == "small") return c;
  if (scale == "tiny") {
    c.train_size = 400;
    c.test_size = 12;
    c.trainer.epochs = 2;
    c.members = 3;
    c.member_epochs = 2;
    c.samples = 8;
    c.spray_samples = 24;
    c.spray.k_nn = 5;
    c.spray.max_k = 8;
    c.laplace_examples = 50;
    return c;
  }
  if (scale == "paper") {
    c.train_size = 20000;
    c.test_size = 2000;
    c.trainer.epochs = 15;
    c.trainer.lr_step = 10;
    c.member_epochs = 10;
    c.member_lr_step = 7;
    c.samples = 100;
    c.spray_samples = 200;
    return c;
  }
  throw InvalidArgument("unknown scale '" + scale + "' (expected tiny, small or paper)");
}

void apply_config(RunConfig& cfg, const ConfigFile& file) {
  for (const auto& [section, entries] : file) {
    bool known_section = false;
    for (const auto& f : fields()) known_section = known_section || section == f.section;
    if (!known_section) throw ParseError("unknown config section [" + section + "]");
    for (const auto& [k, v] : entries) {
      const Field* field = nullptr;
      for (const auto& f : fields())
        if (section == f.section && k == f.key) field = &f;
      if (!field) throw ParseError("unknown config key '" + section + "." + k + "'");
      try {
        field->set(cfg, v);
      } catch (const ParseError& e) {
        throw ParseError(section + "." + k + ": " + e.what());
      }
    }
  }
}

RunConfig resolve_config(const ConfigFile& file, const std::optional<std::string>& scale) {
  ConfigFile rest = file;
  std::string chosen = "small";
  if (auto run = rest.find("run"); run != rest.end()) {
    if (auto it = run->second.find("scale"); it != run->second.end()) {
      chosen = it->second;
      run->second.erase(it);
    }
  }
  if (scale) chosen = *scale;
  RunConfig cfg = preset(chosen);
  apply_config(cfg, rest);
  return cfg;
}

std::string dump_config(const RunConfig& cfg) {
  std::string out, section;
  for (const auto& f : fields()) {
    if (section != f.section) {
      section = f.section;
      out += (out.empty() ? "[" : "\n[") + section + "]\n";
    }
    out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  }
  return out;
}

void validate(const RunConfig& cfg) {
  cfg.synth.validate();
  if (cfg.train_size == 0) throw InvalidArgument("data.train_size must be positive");
  if (cfg.test_size == 0) throw InvalidArgument("eval.images must be positive");
  if (cfg.arch != "lenet" && cfg.arch != "mlp") throw InvalidArgument("net.arch must be lenet or mlp");
  if (cfg.arch == "lenet" && (cfg.synth.image_size != 28)) throw InvalidArgument("the lenet architecture needs 28x28 images");
  if (cfg.arch == "mlp" && cfg.hidden == 0) throw InvalidArgument("net.hidden must be positive");
  if (!(cfg.conv_dropout >= 0.0f && cfg.conv_dropout < 1.0f) || !(cfg.dense_dropout >= 0.0f && cfg.dense_dropout < 1.0f))
    throw InvalidArgument("dropout rates must lie in [0,1)");
  cfg.trainer.validate(cfg.train_size);
  for (const auto& v : cfg.demo_variants)
    if (v != "dropout" && v != "ensemble" && v != "laplace") throw InvalidArgument("unknown posterior variant '" + v + "'");
  if (cfg.variant != "dropout" && cfg.variant != "ensemble" && cfg.variant != "laplace")
    throw InvalidArgument("posterior.variant must be dropout, ensemble or laplace");
  if (cfg.members == 0) throw InvalidArgument("posterior.members must be positive");
  if (cfg.member_epochs == 0 || cfg.member_lr_step == 0) throw InvalidArgument("member epochs and lr step must be positive");
  if (!(cfg.prior_precision > 0.0)) throw InvalidArgument("posterior.prior_precision must be positive");
  if (cfg.samples == 0) throw InvalidArgument("uai.samples must be positive");
  for (double a : cfg.alphas)
    if (!(a >= 0.0 && a <= 100.0)) throw InvalidArgument("uai.alphas must lie in [0,100]");
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) throw InvalidArgument("uai.epsilon must lie in (0,1)");
  if (cfg.spray_samples < 2 || cfg.spray_samples < cfg.spray.max_k)
    throw InvalidArgument("spray.samples must be at least 2 and at least spray.max_k");
  if (cfg.spray.k_nn == 0 || cfg.spray.k_nn >= cfg.spray_samples) throw InvalidArgument("spray.k_nn must lie in [1, samples)");
  if (cfg.spray.pool == 0 || cfg.spray.restarts == 0) throw InvalidArgument("spray.pool and spray.restarts must be positive");
  if (cfg.image >= cfg.test_size) throw InvalidArgument("eval.image must index a test image");
}

}  // namespace uaix
