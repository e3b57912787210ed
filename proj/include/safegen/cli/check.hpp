#pragma once

#include "safegen/cli/context.hpp"
#include "safegen/lqr.hpp"

namespace safegen::cli {

inline std::string report_line(const std::string& k, const std::string& v) { return k + ": " + v + "\n"; }

inline std::string check_report(const LinearSystem& sys) {
  const AssumptionReport a = check_assumptions(sys);
  const SystemNorms& n = sys.norms();
  std::string s;
  s += report_line("dim", std::to_string(sys.dim()));
  s += report_line("norm_A", fmt(n.A));
  s += report_line("norm_B", fmt(n.B));
  s += report_line("norm_D", fmt(n.D));
  s += report_line("norm_Rinv", fmt(n.Rinv));
  s += report_line("stability_threshold", fmt(a.stability_threshold));
  s += report_line("stability_margin", a.stability_margin ? "true" : "false");
  s += report_line("stability_slack", fmt(a.stability_slack));
  s += report_line("contraction", fmt(a.contraction));
  s += report_line("contraction_below_half", a.contraction < 0.5 ? "true" : "false");
  s += report_line("riccati_set_radius", fmt(riccati_set_radius(n)));
  s += report_line("commuting", a.commuting ? "true" : "false");
  s += report_line("commuting_residual", fmt(a.commuting_residual));
  s += report_line("regular", a.regular ? (*a.regular ? "true" : "false") : "not-applicable");
  if (a.alignment) {
    const AlignmentReport& al = *a.alignment;
    s += report_line("alpha", fmt(al.alpha));
    std::string w, per;
    for (int j : al.witnesses) w += (w.empty() ? "" : " ") + std::to_string(j + 1);
    for (Eigen::Index j = 0; j < al.per_index.size(); ++j) per += (j ? " " : "") + fmt(al.per_index(j));
    s += report_line("alignment_witnesses", w);
    s += report_line("alignment_per_index", per);
    s += report_line("witness_lower_bound", fmt(al.witness_lower_bound));
  } else {
    s += report_line("alpha", "not-applicable");
  }
  const auto ub = lqr_lipschitz_upper_bound(sys, false), ubs = lqr_lipschitz_upper_bound(sys, true);
  s += report_line("lqr_lipschitz_upper_bound", ub ? fmt(*ub) : "not-applicable");
  s += report_line("lqr_lipschitz_upper_bound_sharp", ubs ? fmt(*ubs) : "not-applicable");
  const auto lc = separation_lower_coefficient(sys);
  s += report_line("separation_lower_coefficient", lc ? fmt(*lc) : "not-applicable");
  if (!a.stability_margin && a.contraction < 0.5)
    s += "note: ||A||_2 = " + fmt(n.A) + " is above the stability-margin threshold " + fmt(a.stability_threshold) +
         " while the contraction constant " + fmt(a.contraction) +
         " is still below 1/2; the separation bound is reported as not applicable\n";
  return s;
}

inline int run_check(RunContext& ctx) {
  ctx.cfg.check_keys("check", kSystemKeys);
  const LinearSystem sys = build_system(ctx.cfg, "check", ctx.master_seed());
  const std::string rep = check_report(sys);
  ctx.write_text("check.txt", rep);
  *ctx.out << rep;
  ctx.cells.push_back({"system", derive_seed(ctx.master_seed(), {hash_label("system")}), "ok", 0.0});
  return 0;
}

}  // namespace safegen::cli
