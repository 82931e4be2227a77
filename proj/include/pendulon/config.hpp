#pragma once

// Experiment configuration: a small INI dialect ([section], key = value,
// '#' or ';' comments, comma-separated lists) with strict key checking.

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "chain.hpp"
#include "confining.hpp"
#include "errors.hpp"
#include "perturbation.hpp"

namespace pendulon {

/// Invalid configuration; the message starts with "source:line:".
class ConfigError : public DomainError {
 public:
  using DomainError::DomainError;
};

class IniDocument {
 public:
  struct Entry {
    std::string section, key, value;
    int line = 0;
    mutable bool used = false;
  };

  static IniDocument parse(std::string_view text, std::string source = "<config>") {
    IniDocument doc;
    doc.source_ = std::move(source);
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t eol = std::min(text.find('\n', pos), text.size());
      std::string_view line = text.substr(pos, eol - pos);
      pos = eol + 1;
      ++line_no;
      line = strip(cut_comment(line));
      if (line.empty()) {
        if (eol == text.size()) break;
        continue;
      }
      if (line.front() == '[') {
        if (line.back() != ']') doc.fail(line_no, "unterminated section header");
        section = std::string(strip(line.substr(1, line.size() - 2)));
        if (section.empty()) doc.fail(line_no, "empty section name");
        for (const auto& s : doc.sections_)
          if (s.first == section) doc.fail(line_no, "duplicate section [" + section + "]");
        doc.sections_.emplace_back(section, line_no);
        continue;
      }
      const std::size_t eq = line.find('=');
      if (eq == std::string_view::npos) doc.fail(line_no, "expected 'key = value'");
      const std::string key(strip(line.substr(0, eq)));
      const std::string value(strip(line.substr(eq + 1)));
      if (key.empty()) doc.fail(line_no, "missing key before '='");
      if (section.empty()) doc.fail(line_no, "key '" + key + "' outside any section");
      if (doc.find(section, key))
        doc.fail(line_no, "duplicate key '" + key + "' in [" + section + "]");
      doc.entries_.push_back({section, key, value, line_no, false});
      if (eol == text.size()) break;
    }
    return doc;
  }

  static IniDocument load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open configuration file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
  }

  const std::string& source() const { return source_; }

  const Entry* find(const std::string& section, const std::string& key) const {
    for (const Entry& e : entries_)
      if (e.section == section && e.key == key) return &e;
    return nullptr;
  }

  bool has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
  }

  double number(const std::string& section, const std::string& key, double fallback) const {
    const Entry* e = take(section, key);
    return e ? parse_number(*e, e->value) : fallback;
  }

  std::size_t count(const std::string& section, const std::string& key,
                    std::size_t fallback) const {
    const Entry* e = take(section, key);
    if (!e) return fallback;
    std::uint64_t v = 0;
    const auto* b = e->value.data();
    const auto r = std::from_chars(b, b + e->value.size(), v);
    if (r.ec != std::errc() || r.ptr != b + e->value.size())
      fail(e->line, "key '" + key + "': expected a non-negative integer, got '" + e->value + "'");
    return static_cast<std::size_t>(v);
  }

  std::string text(const std::string& section, const std::string& key,
                   const std::string& fallback) const {
    const Entry* e = take(section, key);
    return e ? e->value : fallback;
  }

  std::vector<double> list(const std::string& section, const std::string& key,
                           const std::vector<double>& fallback) const {
    const Entry* e = take(section, key);
    if (!e) return fallback;
    std::vector<double> out;
    std::string_view rest = e->value;
    while (true) {
      const std::size_t c = rest.find(',');
      const std::string item(strip(rest.substr(0, c)));
      if (item.empty()) fail(e->line, "key '" + key + "': empty list item");
      out.push_back(parse_number(*e, item));
      if (c == std::string_view::npos) break;
      rest = rest.substr(c + 1);
    }
    return out;
  }

  /// Throw on the first section or key (in file order) that nobody read.
  void reject_unknown(const std::set<std::string>& known_sections) const {
    for (const auto& [name, line] : sections_)
      if (!known_sections.count(name)) fail(line, "unknown section [" + name + "]");
    for (const Entry& e : entries_)
      if (!e.used) fail(e.line, "unknown key '" + e.key + "' in [" + e.section + "]");
  }

  /// Raise a diagnostic that points at a key's line, or at the file if absent.
  [[noreturn]] void fail_at(const std::string& section, const std::string& key,
                            const std::string& what) const {
    const Entry* e = find(section, key);
    if (e) fail(e->line, "[" + section + "] " + key + ": " + what);
    throw ConfigError(source_ + ": [" + section + "] " + key + ": " + what);
  }

 private:
  std::string source_;
  std::vector<Entry> entries_;
  std::vector<std::pair<std::string, int>> sections_;

  [[noreturn]] void fail(int line, const std::string& what) const {
    throw ConfigError(source_ + ":" + std::to_string(line) + ": " + what);
  }

  const Entry* take(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (e) e->used = true;
    return e;
  }

  double parse_number(const Entry& e, const std::string& s) const {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
      fail(e.line, "key '" + e.key + "': expected a number, got '" + s + "'");
    return v;
  }

  static std::string_view cut_comment(std::string_view s) {
    for (std::size_t i = 0; i < s.size(); ++i)
      if ((s[i] == '#' || s[i] == ';') && (i == 0 || s[i - 1] == ' ' || s[i - 1] == '\t'))
        return s.substr(0, i);
    return s;
  }

  static std::string_view strip(std::string_view s) {
    const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    while (!s.empty() && ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && ws(s.back())) s.remove_suffix(1);
    return s;
  }
};

struct GridConfig {
  double half_width_kink = 20.0;  ///< half width in kink widths 1/k
  std::size_t points = 2000;
};

struct IntegratorConfig {
  double dt = 5e-5;
  double t_end = 0.05;
  std::size_t snapshot_every = 100;
};

struct InitialConfig {
  std::string kind = "kink";  ///< kink | rest
  double v = 0.3;             ///< kink speed [m/s]
  double x0 = 0.0;            ///< kink position [m]
};

struct TWConfig {
  double v = 0.3;
  int max_iter = 60;
  double tol = 1e-10;
};

struct ScalingConfig {
  std::vector<double> eps_list{0.01, 0.02, 0.05, 0.1};
  double e0 = 1e-4;  ///< step of the eps-Taylor extraction
};

struct StiffConfig {
  std::vector<double> ladder{10.0, 100.0, 1000.0, 10000.0};  ///< h''(0) in units of (M + m) g
  std::vector<double> probes{0.8, 0.9, 1.0, 1.1, 1.2};       ///< speeds in units of v_star
  std::size_t points = 1000;
  double widths = 20.0;
};

struct LagexpConfig {
  std::size_t samples = 100;
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  std::string source;
  ChainParams chain;
  std::size_t sites = 400;
  ExpansionParams expansion;
  GridConfig grid;
  IntegratorConfig integrator;
  InitialConfig initial;
  TWConfig tw;
  ScalingConfig scaling;
  StiffConfig stiff;
  LagexpConfig lagexp;
};

inline ChainParams default_chain() {
  ChainParams p;
  p.M = 0.009;
  p.m = 0.001;
  p.R = 0.09;
  p.r = 0.01;
  p.delta = 0.005;
  p.kappa_t = 0.0;
  p.kappa_s = 0.01 / (p.delta * p.delta);
  p.h = ConfiningPotential::quadratic(0.01, 1.0);
  return p;
}

/// Resolve every field, applying defaults, then validate the embedded types.
inline ExperimentConfig read_config(const IniDocument& d) {
  ExperimentConfig c;
  c.source = d.source();
  c.chain = default_chain();

  ConfiningPotential h = c.chain.h;
  try {
    h.family = parse_family(d.text("potential", "family", std::string(h.family_name())));
  } catch (const DomainError& e) {
    d.fail_at("potential", "family", e.what());
  }
  h.phi0 = d.number("potential", "phi0", h.phi0);
  h.c2 = d.number("potential", "c2", h.c2);
  h.b = d.number("potential", "b", h.b);

  ChainParams& p = c.chain;
  p.M = d.number("chain", "M", p.M);
  p.m = d.number("chain", "m", p.m);
  p.R = d.number("chain", "R", p.R);
  p.r = d.number("chain", "r", p.r);
  p.g = d.number("chain", "g", p.g);
  p.delta = d.number("chain", "delta", p.delta);
  // couplings either per bond (kappa) or in the continuum (K = kappa delta^2)
  const double d2 = p.delta * p.delta;
  if (d.has("chain", "kappa_s") && d.has("chain", "K_s"))
    d.fail_at("chain", "K_s", "give either kappa_s or K_s, not both");
  if (d.has("chain", "kappa_t") && d.has("chain", "K_t"))
    d.fail_at("chain", "K_t", "give either kappa_t or K_t, not both");
  const double Ks = d.has("chain", "kappa_s") ? d.number("chain", "kappa_s", 0.0) * d2
                                              : d.number("chain", "K_s", c.chain.Ks());
  const double Kt = d.has("chain", "kappa_t") ? d.number("chain", "kappa_t", 0.0) * d2
                                              : d.number("chain", "K_t", c.chain.Kt());
  p.kappa_s = Ks / d2;
  p.kappa_t = Kt / d2;
  const std::string topo = d.text("chain", "topology", "open");
  if (topo == "open") {
    p.topology = Topology::open;
  } else if (topo == "periodic") {
    p.topology = Topology::periodic;
  } else {
    d.fail_at("chain", "topology", "expected 'open' or 'periodic', got '" + topo + "'");
  }
  c.sites = d.count("chain", "sites", c.sites);
  p.h = h;

  ExpansionParams& q = c.expansion;
  q.A = d.number("expansion", "A", q.A);
  q.Mhat = d.number("expansion", "Mhat", q.Mhat);
  q.Khat = d.number("expansion", "Khat", q.Khat);
  q.g = d.number("expansion", "g", q.g);
  q.eps = d.number("expansion", "eps", q.eps);
  q.r1 = d.number("expansion", "r1", q.r1);
  q.r2 = d.number("expansion", "r2", q.r2);
  q.m1 = d.number("expansion", "m1", q.m1);
  q.m2 = d.number("expansion", "m2", q.m2);
  q.k1 = d.number("expansion", "k1", q.k1);
  q.k2 = d.number("expansion", "k2", q.k2);
  q.v0 = d.number("expansion", "v0", q.v0);
  q.v1 = d.number("expansion", "v1", q.v1);
  q.v2 = d.number("expansion", "v2", q.v2);
  q.delta = d.number("expansion", "delta", q.delta);
  q.h = h;

  c.grid.half_width_kink = d.number("grid", "half_width_kink", c.grid.half_width_kink);
  c.grid.points = d.count("grid", "points", c.grid.points);

  c.integrator.dt = d.number("integrator", "dt", c.integrator.dt);
  c.integrator.t_end = d.number("integrator", "t_end", c.integrator.t_end);
  c.integrator.snapshot_every = d.count("integrator", "snapshot_every", c.integrator.snapshot_every);

  c.initial.kind = d.text("initial", "kind", c.initial.kind);
  c.initial.v = d.number("initial", "v", c.initial.v);
  c.initial.x0 = d.number("initial", "x0", c.initial.x0);

  c.tw.v = d.number("tw", "v", c.tw.v);
  c.tw.max_iter = static_cast<int>(d.count("tw", "max_iter", static_cast<std::size_t>(c.tw.max_iter)));
  c.tw.tol = d.number("tw", "tol", c.tw.tol);

  c.scaling.eps_list = d.list("scaling", "eps_list", c.scaling.eps_list);
  c.scaling.e0 = d.number("scaling", "e0", c.scaling.e0);

  c.stiff.ladder = d.list("stiff", "ladder", c.stiff.ladder);
  c.stiff.probes = d.list("stiff", "probes", c.stiff.probes);
  c.stiff.points = d.count("stiff", "points", c.stiff.points);
  c.stiff.widths = d.number("stiff", "widths", c.stiff.widths);

  c.lagexp.samples = d.count("lagexp", "samples", c.lagexp.samples);
  c.lagexp.seed = d.count("lagexp", "seed", static_cast<std::size_t>(c.lagexp.seed));

  d.reject_unknown({"chain", "potential", "expansion", "grid", "integrator", "initial", "tw",
                    "scaling", "stiff", "lagexp"});

  // semantic checks, reported against the offending key
  auto check = [&](bool ok, const char* section, const char* key, const char* what) {
    if (!ok) d.fail_at(section, key, what);
  };
  try {
    h.validate();
  } catch (const DomainError& e) {
    d.fail_at("potential", "c2", e.what());
  }
  try {
    p.validate();
  } catch (const DomainError& e) {
    throw ConfigError(d.source() + ": [chain] " + e.what());
  }
  try {
    q.validate();
  } catch (const DomainError& e) {
    throw ConfigError(d.source() + ": [expansion] " + e.what());
  }
  check(c.sites >= 3, "chain", "sites", "need at least 3 sites");
  check(c.grid.points >= 6, "grid", "points", "need at least 6 points");
  check(c.grid.half_width_kink > 0.0, "grid", "half_width_kink", "must be > 0");
  check(c.integrator.dt > 0.0, "integrator", "dt", "must be > 0");
  check(c.integrator.t_end > 0.0, "integrator", "t_end", "must be > 0");
  check(c.integrator.snapshot_every >= 1, "integrator", "snapshot_every", "must be >= 1");
  check(c.initial.kind == "kink" || c.initial.kind == "rest", "initial", "kind",
        "expected 'kink' or 'rest'");
  check(c.tw.tol > 0.0, "tw", "tol", "must be > 0");
  check(c.tw.max_iter >= 1, "tw", "max_iter", "must be >= 1");
  check(c.scaling.e0 > 0.0, "scaling", "e0", "must be > 0");
  for (std::size_t i = 1; i < c.stiff.ladder.size(); ++i)
    check(c.stiff.ladder[i] > c.stiff.ladder[i - 1], "stiff", "ladder", "must be increasing");
  for (double x : c.stiff.ladder) check(x > 0.0, "stiff", "ladder", "values must be > 0");
  for (double x : c.stiff.probes) check(x > 0.0, "stiff", "probes", "values must be > 0");
  check(c.stiff.points >= 6, "stiff", "points", "need at least 6 points");
  check(c.stiff.widths > 0.0, "stiff", "widths", "must be > 0");
  check(c.lagexp.samples >= 1, "lagexp", "samples", "must be >= 1");
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  return read_config(IniDocument::load(path));
}

}  // namespace pendulon
