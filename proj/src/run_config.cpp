#include "hullsight/run_config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <variant>

namespace hullsight {

namespace {

using Value = std::variant<bool, std::int64_t, double, std::string>;

struct Parser {
  std::string_view source;
  std::size_t line = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(std::string(source) + ":" + std::to_string(line) + ": " + msg);
  }

  static std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  }

  // Drops a trailing comment that is not inside a string.
  static std::string_view strip_comment(std::string_view s) {
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
      if (s[i] == '#' && !in_string) return s.substr(0, i);
    }
    return s;
  }

  Value value(std::string_view v) const {
    if (v.empty()) fail("missing value");
    if (v.front() == '"') {
      if (v.size() < 2 || v.back() != '"') fail("unterminated string");
      std::string out;
      for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        if (v[i] == '\\' && i + 2 < v.size()) {
          const char e = v[++i];
          out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
        } else {
          out += v[i];
        }
      }
      return out;
    }
    if (v == "true") return true;
    if (v == "false") return false;
    std::string digits;
    for (char c : v)
      if (c != '_') digits += c;
    const char* first = digits.data() + (digits.front() == '+' ? 1 : 0);
    const char* last = digits.data() + digits.size();
    if (digits.find_first_of(".eE") == std::string::npos) {
      std::int64_t i = 0;
      const auto [p, ec] = std::from_chars(first, last, i);
      if (ec == std::errc() && p == last) return i;
    } else {
      double d = 0;
      const auto [p, ec] = std::from_chars(first, last, d);
      if (ec == std::errc() && p == last) return d;
    }
    fail("cannot parse value '" + std::string(v) + "'");
  }

  double number(const Value& v, const std::string& key) const {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return double(*i);
    if (const auto* d = std::get_if<double>(&v)) return *d;
    fail("'" + key + "' must be a number");
  }
  std::int64_t integer(const Value& v, const std::string& key) const {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
    fail("'" + key + "' must be an integer");
  }
  int small_int(const Value& v, const std::string& key) const {
    const auto i = integer(v, key);
    if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max()) fail("'" + key + "' out of range");
    return static_cast<int>(i);
  }
  bool boolean(const Value& v, const std::string& key) const {
    if (const auto* b = std::get_if<bool>(&v)) return *b;
    fail("'" + key + "' must be true or false");
  }
  std::string string(const Value& v, const std::string& key) const {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    fail("'" + key + "' must be a string");
  }
};

}  // namespace

void RunConfig::validate() const {
  model.validate();
  train.validate();
}

RunConfig parse_run_config(std::string_view text, std::string_view source) {
  RunConfig cfg;
  Parser p{source};
  std::string section;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++p.line;
    const std::string_view line = Parser::trim(Parser::strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') p.fail("malformed section header");
      section = std::string(Parser::trim(line.substr(1, line.size() - 2)));
      if (section != "model" && section != "train" && section != "noise") p.fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) p.fail("expected key = value");
    const std::string key(Parser::trim(line.substr(0, eq)));
    const Value v = p.value(Parser::trim(line.substr(eq + 1)));
    const std::string full = section.empty() ? key : section + "." + key;

    if (full == "seed") {
      const auto s = p.integer(v, full);
      if (s < 0) p.fail("seed must be non-negative");
      cfg.seed = static_cast<std::uint64_t>(s);
    } else if (full == "model.base_channels") {
      cfg.model.base_channels = p.integer(v, full);
    } else if (full == "model.r1") {
      cfg.model.r1 = p.integer(v, full);
    } else if (full == "model.r2") {
      cfg.model.r2 = p.integer(v, full);
    } else if (full == "model.sr_scale") {
      cfg.model.sr_scale = p.integer(v, full);
    } else if (full == "model.in_channels") {
      cfg.model.in_channels = p.integer(v, full);
    } else if (full == "train.lr") {
      cfg.train.lr = p.number(v, full);
    } else if (full == "train.momentum") {
      cfg.train.momentum = p.number(v, full);
    } else if (full == "train.weight_decay") {
      cfg.train.weight_decay = p.number(v, full);
    } else if (full == "train.batch") {
      cfg.train.batch = p.small_int(v, full);
    } else if (full == "train.epochs") {
      cfg.train.epochs = p.small_int(v, full);
    } else if (full == "train.patch") {
      cfg.train.patch = p.small_int(v, full);
    } else if (full == "train.train_fraction") {
      cfg.train.train_fraction = p.number(v, full);
    } else if (full == "train.random_severity") {
      cfg.train.random_severity = p.boolean(v, full);
    } else if (full == "train.noise") {
      try {
        cfg.train.noise = parse_noise_kind(p.string(v, full));
      } catch (const ValueError& e) {
        p.fail(e.what());
      }
    } else if (full == "noise.p") {
      cfg.train.fixed.p = p.number(v, full);
    } else if (full == "noise.p_salt") {
      cfg.train.fixed.p_salt = p.number(v, full);
    } else if (full == "noise.p_pepper") {
      cfg.train.fixed.p_pepper = p.number(v, full);
    } else {
      p.fail("unknown key '" + full + "'");
    }
  }
  cfg.train.seed = cfg.seed;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string(source) + ": " + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_run_config(text, path.string());
}

void apply_seed_override(RunConfig& cfg, std::optional<std::string_view> env_value) {
  if (!env_value) return;
  std::uint64_t seed = 0;
  const auto [p, ec] = std::from_chars(env_value->data(), env_value->data() + env_value->size(), seed);
  if (ec != std::errc() || p != env_value->data() + env_value->size() || env_value->empty()) {
    throw ConfigError(std::string(kSeedEnvVar) + " must be a non-negative integer, got '" + std::string(*env_value) +
                      "'");
  }
  cfg.seed = seed;
  cfg.train.seed = seed;
}

}  // namespace hullsight
