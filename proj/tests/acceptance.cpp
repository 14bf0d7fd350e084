// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "finsler/builtins.hpp"
#include "finsler/commands.hpp"
#include "finsler/randers.hpp"
#include "finsler/riemann.hpp"
#include "oracles.hpp"

using namespace finsler;

namespace {

// Accumulates the verdict and the first few failure messages of a criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++count_;
    if (ok) return;
    ++failed_;
    if (failed_ <= 5) failures_ += "\n      " + what;
  }
  void near(double got, double want, double tol, const std::string& what) {
    const double err = std::abs(got - want);
    worst_ = std::max(worst_, err);
    std::ostringstream s;
    s.precision(17);
    s << what << ": got " << got << ", want " << want << " (tol " << tol << ")";
    expect(err <= tol, s.str());
  }
  void note(const std::string& n) { notes_ += "\n      " + n; }

  bool passed() const { return failed_ == 0 && count_ > 0; }
  std::string summary() const {
    std::ostringstream s;
    s << count_ << " checks";
    if (worst_ > 0) s << ", max abs err " << worst_;
    if (failed_) s << ", " << failed_ << " failed" << failures_;
    s << notes_;
    return s.str();
  }

 private:
  int count_ = 0;
  int failed_ = 0;
  double worst_ = 0.0;
  std::string failures_;
  std::string notes_;
};

Vec e(int n, int i) { return unit_vector(n, i); }

RandersMetric metric_of(Builtin b) { return RandersMetric::create(std::move(b.space), std::move(b.drift)); }

struct Run {
  int exit_code = -1;
  std::string out;
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(FLAGCURV_EXE) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string data(const std::string& name) { return std::string(FINSLER_TEST_DATA) + "/" + name; }

// 1. The second-kind formula vanishes on heisenberg3 and su2 while the Koszul
//    oracle gives -0.75 / +0.25 (heisenberg3) and +0.25 (su2).
void counterexample_reproduction(Check& c) {
  const auto heis = builtins::heisenberg3().space;
  const auto su2 = builtins::su2().space;
  for (const auto* rs : {&heis, &su2}) {
    const auto rep = run_counterexample(*rs, 100, 2024);
    for (const auto& s : rep.samples)
      c.expect(s.k_second_kind == 0.0, rs->algebra().name() + " " + s.flag.label +
                                           ": second-kind value not exactly 0");
    c.expect(rep.mismatch_demonstrated, rs->algebra().name() + ": no mismatch demonstrated");
  }
  c.near(sectional_oracle(heis, e(3, 0), e(3, 1)), -0.75, 1e-9, "heisenberg3 K(e1,e2)");
  c.near(sectional_oracle(heis, e(3, 0), e(3, 2)), 0.25, 1e-9, "heisenberg3 K(e1,e3)");
  c.near(sectional_oracle(heis, e(3, 1), e(3, 2)), 0.25, 1e-9, "heisenberg3 K(e2,e3)");
  for (const auto& lf : basis_flags(su2))
    c.near(sectional_oracle(su2, lf.flag.y, lf.flag.u), 0.25, 1e-9, "su2 K" + lf.label);
}

// 2. Both signs on heisenberg3 basis planes; abelian(n) identically flat.
void wolf_sign_mix(Check& c) {
  const auto heis = builtins::heisenberg3().space;
  int pos = 0, neg = 0;
  for (const auto& lf : basis_flags(heis)) {
    const double k = sectional_oracle(heis, lf.flag.y, lf.flag.u);
    pos += k > 1e-9;
    neg += k < -1e-9;
  }
  c.expect(pos > 0, "heisenberg3: no strictly positive basis-plane curvature");
  c.expect(neg > 0, "heisenberg3: no strictly negative basis-plane curvature");
  for (int n = 2; n <= 6; ++n) {
    const auto ab = builtins::abelian(n).space;
    auto flags = basis_flags(ab);
    for (auto& f : random_flags(ab, 20, static_cast<std::uint64_t>(n))) flags.push_back(f);
    for (const auto& lf : flags)
      c.near(sectional_oracle(ab, lf.flag.y, lf.flag.u), 0.0, 1e-9,
             "abelian" + std::to_string(n) + " " + lf.label);
  }
}

// 3. Closed-form g_Y vs central-difference Hessian of 1/2 F^2 (relative
//    1e-4) and vs the alpha + beta expansion (1e-12); 200 seeded cases.
void fundamental_tensor_oracle(Check& c) {
  FlagSampler rng(20240607);
  double worst_rel = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int q = 2 + trial % 5;
    const Mat gram = oracle::random_spd(rng, q);
    const auto rs = ReductiveSpace::create(builtins::abelian(q).space.algebra(), 0, gram);
    const Vec x = oracle::random_drift(rng, gram, 0.9);
    const auto f = RandersMetric::create(rs, DriftVector{x});
    const Vec y = rng.vector(q), u = rng.vector(q), v = rng.vector(q);
    const double closed = fundamental_tensor(f, y, u, v);
    const double fd = fundamental_tensor_fd(f, y, u, v, 1e-5);
    const double scale = std::max(std::abs(closed), std::sqrt(fundamental_tensor(f, y, u, u) *
                                                              fundamental_tensor(f, y, v, v)));
    const double rel = std::abs(fd - closed) / scale;
    worst_rel = std::max(worst_rel, rel);
    c.expect(rel <= 1e-4, "case " + std::to_string(trial) + ": fd relative error " + finsler::io::format_number(rel));
    c.near(closed, oracle::alpha_beta_fundamental_tensor(gram, x, y, u, v), 1e-12,
           "case " + std::to_string(trial) + " alpha+beta");
  }
  c.note("max fd relative error " + finsler::io::format_number(worst_rel));
}

// 4. X = 0: closed form (oracle-consistent) equals the sectional curvature of g.
void riemannian_reduction(Check& c) {
  struct Case {
    Builtin b;
    Hypotheses mode;
  };
  Case cases[] = {{builtins::su2(), Hypotheses::enforce},
                  {builtins::heisenberg3(), Hypotheses::force},
                  {builtins::abelian(4), Hypotheses::enforce},
                  {builtins::toy_gh4(), Hypotheses::enforce}};
  for (auto& cs : cases) {
    const auto& rs = cs.b.space;
    const auto f = RandersMetric::riemannian(rs);
    const std::string name = rs.algebra().name();
    for (const auto& lf : basis_flags(rs)) {
      const double k = flag_curvature_closed_form(f, lf.flag, AlphaVariant::oracle_consistent, cs.mode);
      c.near(k, sectional_nat_reductive(rs, lf.flag.y, lf.flag.u, cs.mode), 1e-10,
             name + " " + lf.label + " vs sectional of g");
      if (name == "toy_gh4") {
        c.near(k, oracle::submersion_sectional(rs, Mat::Identity(1, 1), lf.flag.y, lf.flag.u),
               1e-10, name + " " + lf.label + " vs submersion oracle");
      } else if (name != "heisenberg3") {
        c.near(k, sectional_oracle(rs, lf.flag.y, lf.flag.u), 1e-10,
               name + " " + lf.label + " vs Koszul oracle");
      } else {
        std::ostringstream s;
        s << "heisenberg3 " << lf.label << " (forced, not naturally reductive): closed form " << k
          << ", Koszul " << sectional_oracle(rs, lf.flag.y, lf.flag.u);
        c.note(s.str());
      }
    }
  }
}

// 5. Closed form vs assembled (Koszul R + finite-difference g_Y) on
//    su2_x_r(t), 50 random flags each; records the paper-literal discrepancy.
void closed_form_end_to_end(Check& c) {
  for (double t : {0.1, 0.5, 0.9}) {
    const auto f = metric_of(builtins::su2_x_r(t));
    const auto& rs = f.space();
    const auto table = ConnectionTable::levi_civita(rs);
    double min_rel = INFINITY, max_rel = 0.0;
    int i = 0;
    for (const auto& lf : random_flags(rs, 50, 5000 + static_cast<std::uint64_t>(t * 10))) {
      const double con = flag_curvature_closed_form(f, lf.flag, AlphaVariant::oracle_consistent);
      const double asm_k = flag_curvature_assembled(f, table, lf.flag);
      c.near(con, asm_k, 1e-6, "t=" + std::to_string(t) + " flag " + std::to_string(i));
      const double lit = flag_curvature_closed_form(f, lf.flag, AlphaVariant::paper_literal);
      const auto d = make_discrepancy("literal", lit, "consistent", con);
      const Vec Y = rs.embed(lf.flag.y), U = rs.embed(lf.flag.u);
      const auto& a = rs.algebra();
      const double inner = rs.project(a.bracket(rs.project(a.bracket(U, Y), Part::m), Y), Part::m)
                               .cwiseAbs()
                               .maxCoeff();
      if (inner > 1e-9)
        c.expect(d.rel > 1e-6, "t=" + std::to_string(t) + " flag " + std::to_string(i) +
                                   ": paper-literal unexpectedly matches");
      min_rel = std::min(min_rel, d.rel);
      max_rel = std::max(max_rel, d.rel);
      ++i;
    }
    std::ostringstream s;
    s << "t=" << t << ": paper-literal relative discrepancy in [" << min_rel << ", " << max_rel << "]";
    c.note(s.str());
  }
}

// 6. K(P, lambda Y) = K(P, Y) and K invariant under U -> aU + bY.
void flag_well_definedness(Check& c) {
  const auto f = metric_of(builtins::su2_x_r(0.5));
  int i = 0;
  for (const auto& lf : random_flags(f.space(), 100, 606)) {
    const auto& fl = lf.flag;
    const double k = flag_curvature_closed_form(f, fl, AlphaVariant::oracle_consistent);
    for (double lam : {0.5, 2.0})
      c.near(flag_curvature_closed_form(f, {lam * fl.y, fl.u}, AlphaVariant::oracle_consistent), k,
             1e-9, "flag " + std::to_string(i) + " lambda " + std::to_string(lam));
    for (double a : {-1.0, 3.0})
      for (double b : {0.0, 2.0})
        c.near(flag_curvature_closed_form(f, {fl.y, a * fl.u + b * fl.y},
                                          AlphaVariant::oracle_consistent),
               k, 1e-9, "flag " + std::to_string(i) + " a,b " + std::to_string(a) + "," + std::to_string(b));
    ++i;
  }
}

// 7. Oracle curvature tensor symmetries and the bi-invariant identity.
void curvature_symmetries(Check& c) {
  FlagSampler rng(7007);
  std::vector<ReductiveSpace> spaces = {
      builtins::heisenberg3().space, builtins::su2().space, builtins::su2_x_r(0.0).space,
      oracle::with_gram(builtins::heisenberg3().space, oracle::random_spd(rng, 3)),
      oracle::with_gram(builtins::su2().space, oracle::random_spd(rng, 3)),
      ReductiveSpace::create(oracle::solvable4(), 0, oracle::random_spd(rng, 4))};
  for (const auto& rs : spaces) {
    const auto t = ConnectionTable::levi_civita(rs);
    const int n = rs.dim();
    const std::string name = rs.algebra().name();
    auto R4 = [&](const Vec& a, const Vec& b, const Vec& cc, const Vec& d) {
      return rs.inner(curvature_oracle(rs, t, a, b, cc), d);
    };
    for (int trial = 0; trial < 100; ++trial) {
      const Vec u = rng.vector(n), v = rng.vector(n), w = rng.vector(n), z = rng.vector(n);
      const double r = R4(u, v, w, z);
      c.near(r, -R4(v, u, w, z), 1e-9, name + " antisymmetry (1,2)");
      c.near(r, -R4(u, v, z, w), 1e-9, name + " antisymmetry (3,4)");
      c.near(r, R4(w, z, u, v), 1e-9, name + " pair symmetry");
      const Vec b = curvature_oracle(rs, t, u, v, w) + curvature_oracle(rs, t, v, w, u) +
                    curvature_oracle(rs, t, w, u, v);
      c.near(b.cwiseAbs().maxCoeff(), 0.0, 1e-9, name + " first Bianchi");
    }
  }
  const auto su2 = builtins::su2().space;
  const auto t = ConnectionTable::levi_civita(su2);
  const auto& a = su2.algebra();
  for (int trial = 0; trial < 100; ++trial) {
    const Vec u = rng.vector(3), v = rng.vector(3), w = rng.vector(3);
    const Vec diff = curvature_oracle(su2, t, u, v, w) + 0.25 * a.bracket(a.bracket(u, v), w);
    c.near(diff.cwiseAbs().maxCoeff(), 0.0, 1e-10, "su2 bi-invariant identity");
  }
}

// 8. Byte determinism of every command, builder -> file -> ingest round-trip,
//    and the exit-code contract on defect inputs.
void cli_contract(Check& c) {
  const std::vector<std::string> commands = {
      "validate " + data("su2_x_r_0.5.json"),
      "flag-curvature " + data("su2_x_r_0.5.json") + " --y 1,0,0,0 --u 0,1,0,0 --variant all",
      "flag-curvature --builtin su2_x_r:0.9 --y 0.3,-0.2,0.1,0.8 --u 1,0.5,0,-0.2",
      "flag-curvature --builtin heisenberg3 --y 1,0,0 --u 0,1,0 --force --variant paper-literal",
      "counterexample --builtin heisenberg3",
      "counterexample --builtin su2 --samples 100 --seed 7",
      "sweep --builtin su2_x_r:0.5 --grid basis+random:30:11",
      "sweep --builtin heisenberg3 --grid basis --pretty",
      "export --builtin toy_gh4"};
  for (const auto& cmd : commands) {
    const auto a = run_cli(cmd), b = run_cli(cmd);
    c.expect(a.exit_code == 0, "'" + cmd + "' exit " + std::to_string(a.exit_code));
    c.expect(!a.out.empty() && a.out == b.out, "'" + cmd + "' not byte-identical");
  }

  const auto tmp = std::filesystem::temp_directory_path() /
                   ("flagcurv_roundtrip_" + std::to_string(::getpid()));
  std::filesystem::create_directories(tmp);
  for (const char* name : {"heisenberg3", "su2", "su2_x_r:0.5", "abelian:4", "toy_gh4"}) {
    const auto b = builtins::build(name);
    const auto exported = run_cli(std::string("export --builtin ") + name);
    std::string file = name;
    std::replace(file.begin(), file.end(), ':', '_');
    const auto path = tmp / (file + ".json");
    std::ofstream(path) << exported.out;
    const auto back = io::to_builtin(io::parse_document(io::read_file(path.string())));
    c.expect(back.space == b.space && back.drift == b.drift,
             std::string(name) + ": ingest of exported file differs");
    c.expect(run_cli("export " + path.string()).out == exported.out,
             std::string(name) + ": re-export differs");
    c.expect(run_cli("validate " + path.string()).exit_code == 0,
             std::string(name) + ": exported file does not validate");
  }
  std::filesystem::remove_all(tmp);

  struct ExitCase {
    std::string args;
    int code;
  };
  const ExitCase exits[] = {
      {"validate " + data("heisenberg3.json"), 0},
      {"validate " + data("duplicate_bracket.json"), 2},
      {"validate " + data("negative_gram.json"), 2},
      {"validate " + data("bad_jacobi.json"), 2},
      {"validate " + data("malformed.json"), 2},
      {"flag-curvature " + data("su2_x_r_0.5.json") + " --y 1,0,0,0 --u 1,0,0,0", 3},
      {"flag-curvature " + data("heisenberg3.json") + " --y 1,0,0 --u 0,1,0", 4},
      {"counterexample --builtin toy_gh4", 4},
      {"counterexample --builtin abelian3", 0},
  };
  for (const auto& x : exits) {
    const int got = run_cli(x.args).exit_code;
    c.expect(got == x.code, "'" + x.args + "' exit " + std::to_string(got) + ", want " +
                                std::to_string(x.code));
  }
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* title;
    std::function<void(Check&)> run;
  };
  const Criterion criteria[] = {
      {"AC1", "counterexample reproduction", counterexample_reproduction},
      {"AC2", "sign mix on heisenberg3, abelian flat", wolf_sign_mix},
      {"AC3", "fundamental tensor vs finite differences and alpha+beta", fundamental_tensor_oracle},
      {"AC4", "Riemannian reduction at X = 0", riemannian_reduction},
      {"AC5", "closed form vs assembled Koszul/finite-difference route", closed_form_end_to_end},
      {"AC6", "flag well-definedness", flag_well_definedness},
      {"AC7", "curvature tensor symmetries", curvature_symmetries},
      {"AC8", "CLI determinism, round-trip, exit codes", cli_contract},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      cr.run(c);
    } catch (const std::exception& ex) {
      c.expect(false, std::string("exception: ") + ex.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = c.passed();
    failed += !ok;
    std::printf("[%s] %s %s (%.2fs): %s\n", ok ? "PASS" : "FAIL", cr.id, cr.title, secs,
                c.summary().c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed,
              std::size(criteria));
  return failed == 0 ? 0 : 1;
}
