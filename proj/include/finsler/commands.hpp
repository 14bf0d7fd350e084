#pragma once

// Command layer behind the flagcurv tool. Each command returns its exit code
// and output text instead of printing, so tests can drive it in-process.
//
// Exit codes: 0 ok, 2 invalid input, 3 degenerate flag, 4 hypothesis violation.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "builtins.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "randers.hpp"

namespace finsler::cli {

enum ExitCode : int { ok = 0, invalid_input = 2, degenerate_flag = 3, hypothesis_violation = 4 };

struct CommandResult {
  int exit_code = ok;
  std::string out;
  std::string err;
};

// Exactly one of path / builtin is expected.
struct Source {
  std::optional<std::string> path;
  std::optional<std::string> builtin;
};

inline Builtin load(const Source& src) {
  if (src.builtin && src.path) throw InputError("give either a file or --builtin, not both");
  if (src.builtin) return builtins::build(*src.builtin);
  if (!src.path) throw InputError("no input: give an algebra file or --builtin");
  return io::to_builtin(io::parse_document(io::read_file(*src.path)));
}

inline std::string source_name(const Source& src) {
  return src.builtin ? "builtin:" + *src.builtin : src.path.value_or("");
}

// Runs `body`, mapping library errors onto the exit-code contract.
inline CommandResult guarded(const std::function<CommandResult()>& body) {
  try {
    return body();
  } catch (const DegenerateFlagError& e) {
    return {degenerate_flag, "", std::string("error: degenerate flag: ") + e.what() + "\n"};
  } catch (const HypothesisError& e) {
    return {hypothesis_violation, "", std::string("error: hypothesis violation: ") + e.what() + "\n"};
  } catch (const Error& e) {
    return {invalid_input, "", std::string("error: ") + e.what() + "\n"};
  }
}

// "1,0,-0.5" -> vector of the expected length.
inline Vec parse_coords(const std::string& text, int expected, const char* what) {
  std::vector<double> vals;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = std::min(text.find(',', pos), text.size());
    std::string item = text.substr(pos, comma - pos);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    double v = 0.0;
    const auto* end = item.data() + item.size();
    auto [p, ec] = std::from_chars(item.data(), end, v);
    if (item.empty() || ec != std::errc() || p != end)
      throw InputError(std::string(what) + ": cannot parse '" + item + "' as a number");
    vals.push_back(v);
    pos = comma + 1;
  }
  if (static_cast<int>(vals.size()) != expected)
    throw InputError(std::string(what) + ": expected " + std::to_string(expected) +
                     " m-coordinates, got " + std::to_string(vals.size()));
  return Eigen::Map<Vec>(vals.data(), expected);
}

inline io::Json optional_json(const std::optional<double>& v) {
  return v ? io::Json(*v) : io::Json(nullptr);
}

inline io::Json report_json(const CurvatureReport& r) {
  io::Json j;
  j["flag"] = {{"y", io::vector_json(r.flag.y)}, {"u", io::vector_json(r.flag.u)}};
  j["randers_norm"] = r.randers_norm;
  io::Json gy;
  gy["yy"] = r.gy_yy;
  gy["yu"] = r.gy_yu;
  gy["uu"] = r.gy_uu;
  gy["fd_step"] = 1e-5;
  gy["fd_max_abs_diff"] = r.gy_fd_max_abs_diff;
  gy["fd_truncation_estimate"] = r.gy_fd_truncation_estimate;
  j["fundamental_tensor"] = gy;
  io::Json k;
  k["closed_form_oracle_consistent"] = optional_json(r.k_closed_form_consistent);
  k["closed_form_paper_literal"] = optional_json(r.k_closed_form_literal);
  k["assembled"] = optional_json(r.k_assembled);
  k["second_kind_known_incorrect"] = r.k_second_kind;
  k["sectional_koszul"] = optional_json(r.sectional_koszul);
  j["curvature"] = k;
  io::Json d = io::Json::array();
  for (const auto& x : r.discrepancies)
    d.push_back({{"lhs", x.lhs}, {"rhs", x.rhs}, {"abs", x.abs}, {"rel", x.rel}});
  j["discrepancies"] = d;
  io::Json h;
  h["naturally_reductive"] = r.naturally_reductive;
  h["naturally_reductive_residual"] = r.nr_residual;
  h["drift_norm_below_one"] = r.drift_norm_below_one;
  h["drift_h_invariant"] = r.drift_h_invariant;
  h["drift_parallel"] = r.drift_parallel;
  h["forced"] = r.forced;
  j["hypotheses"] = h;
  j["caveats"] = r.caveats;
  return j;
}

inline constexpr const char* kSecondKindNote =
    "second_kind_known_incorrect uses the curvature of the canonical connection of the "
    "second kind in place of the Levi-Civita curvature; it vanishes on every Lie group";

// Flattened "path  value" listing for --pretty.
inline void flatten(const io::Json& j, const std::string& prefix,
                    std::vector<std::pair<std::string, std::string>>& rows) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, rows);
  } else if (j.is_array() && !j.empty() && j.front().is_structured()) {
    for (std::size_t i = 0; i < j.size(); ++i)
      flatten(j[i], prefix + "[" + std::to_string(i) + "]", rows);
  } else {
    std::string v = io::to_text(j);
    v.pop_back();
    rows.emplace_back(prefix, v);
  }
}

inline std::string pretty(const io::Json& j) {
  std::vector<std::pair<std::string, std::string>> rows;
  flatten(j, "", rows);
  std::size_t w = 0;
  for (const auto& r : rows) w = std::max(w, r.first.size());
  std::string out;
  for (const auto& [k, v] : rows) out += k + std::string(w - k.size() + 2, ' ') + v + "\n";
  return out;
}

inline std::string emit(const io::Json& j, bool as_pretty) {
  return as_pretty ? pretty(j) : io::to_text(j);
}

inline CommandResult cmd_validate(const Source& src, bool as_pretty = false) {
  io::Json j;
  j["command"] = "validate";
  j["source"] = source_name(src);
  std::vector<std::string> diags;
  try {
    if (src.builtin) {
      const auto b = load(src);
      diags = io::diagnose(io::parse_document(io::export_document(b.space, b.drift)));
    } else {
      diags = io::diagnose(io::parse_document(io::read_file(src.path.value_or(""))));
    }
  } catch (const Error& e) {
    diags.push_back(e.what());
  }
  j["valid"] = diags.empty();
  j["diagnostics"] = diags;
  CommandResult r{diags.empty() ? ok : invalid_input, emit(j, as_pretty), ""};
  for (const auto& d : diags) r.err += "error: " + d + "\n";
  return r;
}

inline std::string variant_name(const std::string& v) {
  if (v == "oracle-consistent" || v == "paper-literal" || v == "all") return v;
  throw InputError("--variant must be one of oracle-consistent, paper-literal, all");
}

inline CommandResult cmd_flag_curvature(const Source& src, const std::string& y,
                                        const std::string& u,
                                        const std::string& variant = "oracle-consistent",
                                        bool force = false, bool as_pretty = false) {
  return guarded([&] {
    const std::string var = variant_name(variant);
    auto b = load(src);
    const auto metric = RandersMetric::create(std::move(b.space), std::move(b.drift));
    const auto& rs = metric.space();
    const Flag flag{parse_coords(y, rs.m_dim(), "--y"), parse_coords(u, rs.m_dim(), "--u")};
    require_flag(metric, flag);
    if (!force) {
      // Refuses with the same messages the closed form would raise.
      flag_curvature_closed_form(metric, flag, AlphaVariant::oracle_consistent);
    }
    ReportOptions opt;
    opt.mode = force ? Hypotheses::force : Hypotheses::enforce;
    opt.include_paper_literal = var != "oracle-consistent";
    const auto rep = curvature_report(metric, flag, opt);

    io::Json j;
    j["command"] = "flag-curvature";
    j["source"] = source_name(src);
    j["algebra"] = rs.algebra().name();
    j["dim"] = rs.dim();
    j["h_dim"] = rs.h_dim();
    j["variant"] = var;
    j["drift"] = io::vector_json(metric.x());
    const auto body = report_json(rep);
    for (const auto& [k, v] : body.items()) j[k] = v;
    j["notes"] = {kSecondKindNote};
    return CommandResult{ok, emit(j, as_pretty), ""};
  });
}

inline io::Json counterexample_json(const CounterexampleReport& rep, const Source& src) {
  io::Json j;
  j["command"] = "counterexample";
  j["source"] = source_name(src);
  j["algebra"] = rep.algebra;
  j["drift"] = "zero";
  j["seed"] = rep.seed;
  j["samples"] = rep.sample_size;
  j["nilpotency_class"] = rep.nilpotency ? io::Json(*rep.nilpotency) : io::Json("not nilpotent");
  j["abelian"] = rep.abelian;
  io::Json flags = io::Json::array();
  for (const auto& s : rep.samples) {
    io::Json f;
    f["label"] = s.flag.label;
    f["y"] = io::vector_json(s.flag.flag.y);
    f["u"] = io::vector_json(s.flag.flag.u);
    f["k_second_kind_known_incorrect"] = s.k_second_kind;
    f["k_sectional_koszul"] = s.k_sectional;
    flags.push_back(f);
  }
  j["flags"] = flags;
  j["sign_mix"] = {{"positive", rep.positive},
                   {"negative", rep.negative},
                   {"zero", rep.zero},
                   {"threshold", kSignTol},
                   {"both_signs_required", rep.sign_mix_required},
                   {"both_signs_present", rep.sign_mix_present}};
  j["mismatch_demonstrated"] = rep.mismatch_demonstrated;
  j["notes"] = {kSecondKindNote};
  return j;
}

inline CommandResult cmd_counterexample(const Source& src, int samples = 0,
                                        std::uint64_t seed = 0, bool as_pretty = false) {
  return guarded([&] {
    const auto b = load(src);
    const auto rep = run_counterexample(b.space, samples, seed);
    return CommandResult{ok, emit(counterexample_json(rep, src), as_pretty), ""};
  });
}

struct Grid {
  bool basis = false;
  int random = 0;
  std::uint64_t seed = 0;
};

// "basis", "random:<N>[:<seed>]" or "basis+random:<N>[:<seed>]".
inline Grid parse_grid(const std::string& spec) {
  Grid g;
  std::string rest = spec;
  if (rest == "basis") {
    g.basis = true;
    return g;
  }
  if (rest.starts_with("basis+")) {
    g.basis = true;
    rest = rest.substr(6);
  }
  if (!rest.starts_with("random:")) throw InputError("bad --grid '" + spec + "'");
  rest = rest.substr(7);
  const auto colon = rest.find(':');
  auto num = [&](const std::string& s, auto& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size())
      throw InputError("bad --grid '" + spec + "'");
  };
  num(rest.substr(0, colon), g.random);
  if (colon != std::string::npos) num(rest.substr(colon + 1), g.seed);
  if (g.random < 0) throw InputError("bad --grid '" + spec + "'");
  return g;
}

struct SweepRow {
  LabeledFlag flag;
  CurvatureReport report;
};

inline std::string pretty_table(const std::vector<SweepRow>& rows) {
  const char* head[] = {"flag", "closed_consistent", "closed_literal", "assembled",
                        "second_kind", "sectional_koszul"};
  std::vector<std::vector<std::string>> cells;
  cells.emplace_back(std::begin(head), std::end(head));
  auto num = [](const std::optional<double>& v) {
    if (!v) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", *v == 0.0 ? 0.0 : *v);
    return std::string(buf);
  };
  for (const auto& r : rows)
    cells.push_back({r.flag.label, num(r.report.k_closed_form_consistent),
                     num(r.report.k_closed_form_literal), num(r.report.k_assembled),
                     num(r.report.k_second_kind), num(r.report.sectional_koszul)});
  std::vector<std::size_t> w(std::size(head), 0);
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size(); ++c) w[c] = std::max(w[c], row[c].size());
  std::string out;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c)
      out += row[c] + std::string(w[c] - row[c].size() + (c + 1 < row.size() ? 2 : 0), ' ');
    out += "\n";
  }
  return out;
}

// Evaluates all variants over a flag grid. Rows are computed concurrently but
// stored by canonical flag index, so the output does not depend on scheduling.
inline CommandResult cmd_sweep(const Source& src, const std::string& grid_spec = "basis",
                               bool force = false, bool as_pretty = false,
                               unsigned threads = 0) {
  return guarded([&] {
    const Grid grid = parse_grid(grid_spec);
    auto b = load(src);
    const auto metric = RandersMetric::create(std::move(b.space), std::move(b.drift));
    const auto& rs = metric.space();
    std::vector<LabeledFlag> flags;
    if (grid.basis) flags = basis_flags(rs);
    for (auto& f : random_flags(rs, grid.random, grid.seed)) flags.push_back(std::move(f));

    ReportOptions opt;
    opt.mode = force ? Hypotheses::force : Hypotheses::enforce;
    std::vector<SweepRow> rows(flags.size());
    const unsigned hw = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min<std::size_t>(hw, std::max<std::size_t>(1, flags.size()));
    std::vector<std::exception_ptr> failures(workers);
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
          try {
            for (std::size_t i = w; i < flags.size(); i += workers)
              rows[i] = {flags[i], curvature_report(metric, flags[i].flag, opt)};
          } catch (...) {
            failures[w] = std::current_exception();
          }
        });
    }
    for (const auto& f : failures)
      if (f) std::rethrow_exception(f);

    if (as_pretty) return CommandResult{ok, pretty_table(rows), ""};
    io::Json j;
    j["command"] = "sweep";
    j["source"] = source_name(src);
    j["algebra"] = rs.algebra().name();
    j["grid"] = grid_spec;
    j["drift"] = io::vector_json(metric.x());
    j["forced"] = force;
    io::Json out = io::Json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      io::Json row;
      row["index"] = i;
      row["label"] = rows[i].flag.label;
      const auto body = report_json(rows[i].report);
      for (const auto& [k, v] : body.items()) row[k] = v;
      out.push_back(row);
    }
    j["rows"] = out;
    j["notes"] = {kSecondKindNote};
    return CommandResult{ok, io::to_text(j), ""};
  });
}

inline CommandResult cmd_export(const Source& src) {
  return guarded([&] {
    const auto b = load(src);
    return CommandResult{ok, io::export_document(b.space, b.drift), ""};
  });
}

}  // namespace finsler::cli
