#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "corrdyn/misiurewicz.hpp"
#include "corrdyn/orbifold.hpp"
#include "corrdyn/render.hpp"
#include "json.hpp"

using nlohmann::ordered_json;

namespace {

corrdyn::Complex parse_complex_flag(const std::string& text, const std::string& flag) {
  const auto fail = [&]() -> corrdyn::Complex {
    throw CLI::ValidationError(flag, "expected RE,IM (e.g. -0.5,0)");
  };
  const auto comma = text.find(',');
  if (comma == std::string::npos || comma == 0 || comma + 1 == text.size())
    return fail();
  try {
    std::size_t used = 0;
    const double re = std::stod(text.substr(0, comma), &used);
    if (used != comma) return fail();
    const std::string imag_part = text.substr(comma + 1);
    const double im = std::stod(imag_part, &used);
    if (used != imag_part.size()) return fail();
    return corrdyn::Complex(re, im);
  } catch (const std::logic_error&) {
    return fail();
  }
}

ordered_json complex_json(corrdyn::Complex z) {
  return ordered_json::array({z.real(), z.imag()});
}

ordered_json orbit_json(const corrdyn::BoundedBranch& branch) {
  ordered_json arr = ordered_json::array();
  for (const corrdyn::Complex z : branch.points) arr.push_back(complex_json(z));
  return arr;
}

ordered_json report_json(const corrdyn::MisiurewiczReport& rep) {
  ordered_json j;
  j["c"] = complex_json(rep.c);
  j["verdict"] = rep.verdict;
  j["bounded_branch_count"] = rep.bounded_branch_count;
  j["orbit"] = rep.orbit ? orbit_json(*rep.orbit) : ordered_json(nullptr);
  j["ell"] = rep.ell >= 0 ? ordered_json(rep.ell) : ordered_json(nullptr);
  j["n"] = rep.n >= 1 ? ordered_json(rep.n) : ordered_json(nullptr);
  if (rep.cycle) {
    ordered_json cyc;
    ordered_json pts = ordered_json::array();
    for (const corrdyn::Complex z : rep.cycle->points) pts.push_back(complex_json(z));
    cyc["points"] = pts;
    cyc["multiplier"] = complex_json(rep.cycle->multiplier);
    cyc["classification"] = corrdyn::to_string(rep.cycle->classification);
    j["cycle"] = cyc;
  } else {
    j["cycle"] = nullptr;
  }
  j["reason"] = corrdyn::to_string(rep.reason);
  j["depth"] = rep.depth;
  return j;
}

ordered_json survey_json(const corrdyn::ExpansionSurvey& s) {
  ordered_json j;
  j["samples"] = s.samples;
  j["samples_near_singular"] = s.samples_near_singular;
  j["global_max_norm"] = s.global_max_norm;
  j["max_norm_near_singular"] = s.max_norm_near_singular;
  j["eta_estimate"] = s.eta_estimate;
  ordered_json hist = ordered_json::array();
  for (std::size_t i = 0; i < s.histogram.size(); ++i) {
    const double edge = i < 32 ? static_cast<double>(i) / 16.0 : 2.0;
    hist.push_back(ordered_json::array({edge, s.histogram[i]}));
  }
  j["histogram"] = hist;
  return j;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw corrdyn::IoError("cannot open " + path + " for writing");
  out << content;
  if (!out) throw corrdyn::IoError("failed writing " + path);
}

void emit_json(const ordered_json& j, const std::string& path) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty())
    std::cout << text;
  else
    write_text(path, text);
}

int env_default_threads() {
  const char* env = std::getenv("CORRDYN_THREADS");
  if (env == nullptr) return 0;
  try {
    const int v = std::stoi(env);
    return v > 0 ? v : 0;
  } catch (const std::logic_error&) {
    return 0;
  }
}

struct RasterFlags {
  std::string center_text = "0,0";
  double half_width = 2.0;
  double half_height = 0.0;  // 0: derived from the aspect ratio
  int width = 512;
  int height = 512;
  int threads = 0;
  std::string out;
  std::string csv;
};

void add_raster_flags(CLI::App* cmd, RasterFlags& f) {
  cmd->add_option("--center", f.center_text, "Window center as RE,IM")
      ->capture_default_str();
  cmd->add_option("--half-width", f.half_width, "Half extent along the real axis")
      ->capture_default_str();
  cmd->add_option("--half-height", f.half_height,
                  "Half extent along the imaginary axis (default: aspect-derived)");
  cmd->add_option("--width", f.width, "Raster width in pixels")->capture_default_str();
  cmd->add_option("--height", f.height, "Raster height in pixels")
      ->capture_default_str();
  cmd->add_option("--threads", f.threads,
                  "Worker threads (0: logical cores; env CORRDYN_THREADS)")
      ->capture_default_str();
  cmd->add_option("--out", f.out, "Output PGM path")->required();
  cmd->add_option("--csv", f.csv, "Also dump raw grid values as CSV");
}

corrdyn::Region make_region(const RasterFlags& f) {
  corrdyn::Region region;
  region.center = parse_complex_flag(f.center_text, "--center");
  region.half_width = f.half_width;
  region.half_height = f.half_height > 0.0
                           ? f.half_height
                           : f.half_width * static_cast<double>(f.height) /
                                 static_cast<double>(std::max(1, f.width));
  return region;
}

int resolve_threads_flag(int flag_value) {
  return flag_value > 0 ? flag_value : env_default_threads();
}

ordered_json grid_meta(const corrdyn::DepthGrid& grid) {
  ordered_json j;
  j["kind"] = grid.kind == corrdyn::GridKind::escape ? "escape" : "hits";
  if (grid.kind == corrdyn::GridKind::hits) j["hit_cap"] = corrdyn::hit_cap(grid);
  long long flagged = 0;
  ordered_json pixels = ordered_json::array();
  for (std::size_t i = 0; i < grid.capacity_mask.size(); ++i) {
    if (grid.capacity_mask[i]) {
      ++flagged;
      pixels.push_back(i);
    }
  }
  j["capacity_flagged"] = flagged;
  j["capacity_pixels"] = pixels;
  return j;
}

ordered_json region_meta(const corrdyn::Region& region, const RasterFlags& f) {
  ordered_json j;
  j["center"] = complex_json(region.center);
  j["half_width"] = region.half_width;
  j["half_height"] = region.half_height;
  j["width"] = f.width;
  j["height"] = f.height;
  return j;
}

void write_raster_outputs(const corrdyn::DepthGrid& grid, const RasterFlags& f,
                          ordered_json meta) {
  corrdyn::write_pgm(grid, f.out);
  if (!f.csv.empty()) corrdyn::write_grid_csv(grid, f.csv);
  meta.update(grid_meta(grid));
  write_text(f.out + ".json", meta.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corrdyn: dynamics of the algebraic correspondence (w - c)^q = z^p"};
  app.require_subcommand(1);
  int exit_code = 0;

  // ---- multibrot ----------------------------------------------------------
  auto* mb = app.add_subcommand(
      "multibrot", "Render the parameter-plane set {c : 0 has a bounded orbit}");
  struct {
    int p = 2, q = 1, depth = 100;
    RasterFlags raster;
    double dedup_tol = 0.0, escape_radius = 0.0;
    std::size_t frontier_cap = 200000;
  } mbf;
  mb->add_option("--p", mbf.p, "Forward exponent p")->required();
  mb->add_option("--q", mbf.q, "Backward exponent q")->required();
  mb->add_option("--depth", mbf.depth, "Escape iteration cap (sentinel depth)")
      ->capture_default_str();
  mb->add_option("--dedup-tol", mbf.dedup_tol,
                 "Frontier merge tolerance (0: 1e-9 * max(1, R))")
      ->capture_default_str();
  mb->add_option("--escape-radius", mbf.escape_radius,
                 "Escape radius override (0: computed bound)")
      ->capture_default_str();
  mb->add_option("--frontier-cap", mbf.frontier_cap, "Frontier size cap per level")
      ->capture_default_str();
  add_raster_flags(mb, mbf.raster);
  mb->set_config("--config", "", "Read key=value defaults from a file");
  mb->callback([&] {
    corrdyn::RenderSpec spec;
    spec.width = mbf.raster.width;
    spec.height = mbf.raster.height;
    spec.max_depth = mbf.depth;
    spec.threads = resolve_threads_flag(mbf.raster.threads);
    spec.orbit.dedup_tol = mbf.dedup_tol;
    spec.orbit.frontier_cap = mbf.frontier_cap;
    if (mbf.escape_radius > 0.0) spec.orbit.escape_radius_override = mbf.escape_radius;
    const corrdyn::Region region = make_region(mbf.raster);
    const corrdyn::DepthGrid grid = render_multibrot(region, spec, mbf.p, mbf.q);
    ordered_json meta;
    meta["mode"] = "multibrot";
    meta["p"] = mbf.p;
    meta["q"] = mbf.q;
    meta["region"] = region_meta(region, mbf.raster);
    meta["max_depth"] = mbf.depth;
    write_raster_outputs(grid, mbf.raster, std::move(meta));
  });

  // ---- julia (escape) -----------------------------------------------------
  auto* jl = app.add_subcommand("julia", "Render a filled Julia set by escape depth");
  struct {
    int p = 2, q = 1, depth = 100;
    std::string c_text;
    RasterFlags raster;
    double dedup_tol = 0.0, escape_radius = 0.0;
    std::size_t frontier_cap = 200000;
  } jlf;
  jl->add_option("--p", jlf.p, "Forward exponent p")->required();
  jl->add_option("--q", jlf.q, "Backward exponent q")->required();
  jl->add_option("--c", jlf.c_text, "Parameter c as RE,IM")->required();
  jl->add_option("--depth", jlf.depth, "Escape iteration cap (sentinel depth)")
      ->capture_default_str();
  jl->add_option("--dedup-tol", jlf.dedup_tol,
                 "Frontier merge tolerance (0: 1e-9 * max(1, R))")
      ->capture_default_str();
  jl->add_option("--escape-radius", jlf.escape_radius,
                 "Escape radius override (0: computed bound)")
      ->capture_default_str();
  jl->add_option("--frontier-cap", jlf.frontier_cap, "Frontier size cap per level")
      ->capture_default_str();
  add_raster_flags(jl, jlf.raster);
  jl->set_config("--config", "", "Read key=value defaults from a file");
  jl->callback([&] {
    corrdyn::RenderSpec spec;
    spec.width = jlf.raster.width;
    spec.height = jlf.raster.height;
    spec.max_depth = jlf.depth;
    spec.threads = resolve_threads_flag(jlf.raster.threads);
    spec.orbit.dedup_tol = jlf.dedup_tol;
    spec.orbit.frontier_cap = jlf.frontier_cap;
    if (jlf.escape_radius > 0.0) spec.orbit.escape_radius_override = jlf.escape_radius;
    const corrdyn::Complex c = parse_complex_flag(jlf.c_text, "--c");
    const corrdyn::Region region = make_region(jlf.raster);
    const corrdyn::DepthGrid grid = render_julia_escape(c, region, spec, jlf.p, jlf.q);
    ordered_json meta;
    meta["mode"] = "julia";
    meta["p"] = jlf.p;
    meta["q"] = jlf.q;
    meta["c"] = complex_json(c);
    meta["region"] = region_meta(region, jlf.raster);
    meta["max_depth"] = jlf.depth;
    write_raster_outputs(grid, jlf.raster, std::move(meta));
  });

  // ---- inverse-julia ------------------------------------------------------
  auto* ij = app.add_subcommand("inverse-julia",
                                "Render a Julia set by backward iteration of 0");
  struct {
    int p = 2, q = 1, iters = 8;
    std::string c_text;
    std::string mode = "full-tree";
    std::uint64_t seed = 1, node_budget = 40'000'000;
    double dedup_tol = 0.0;
    RasterFlags raster;
  } ijf;
  ij->add_option("--p", ijf.p, "Forward exponent p")->required();
  ij->add_option("--q", ijf.q, "Backward exponent q")->required();
  ij->add_option("--c", ijf.c_text, "Parameter c as RE,IM")->required();
  ij->add_option("--mode", ijf.mode, "full-tree or random")
      ->check(CLI::IsMember({"full-tree", "random"}))
      ->capture_default_str();
  ij->add_option("--iters", ijf.iters, "Backward iteration depth")
      ->capture_default_str();
  ij->add_option("--seed", ijf.seed, "Chaos-game seed (random mode)")
      ->capture_default_str();
  ij->add_option("--node-budget", ijf.node_budget,
                 "Full-tree refusal threshold on p^iters")
      ->capture_default_str();
  ij->add_option("--dedup-tol", ijf.dedup_tol,
                 "Per-level merge tolerance (0: 1e-9 * max(1, R))")
      ->capture_default_str();
  add_raster_flags(ij, ijf.raster);
  ij->set_config("--config", "", "Read key=value defaults from a file");
  ij->callback([&] {
    corrdyn::RenderSpec spec;
    spec.width = ijf.raster.width;
    spec.height = ijf.raster.height;
    spec.threads = resolve_threads_flag(ijf.raster.threads);
    corrdyn::InverseSpec inv;
    inv.n_iters = ijf.iters;
    inv.mode = ijf.mode == "random" ? corrdyn::InverseMode::random_walk
                                    : corrdyn::InverseMode::full_tree;
    inv.node_budget = ijf.node_budget;
    inv.seed = ijf.seed;
    inv.dedup_tol = ijf.dedup_tol;
    const corrdyn::Complex c = parse_complex_flag(ijf.c_text, "--c");
    const corrdyn::Region region = make_region(ijf.raster);
    const corrdyn::DepthGrid grid =
        render_julia_inverse(c, region, spec, ijf.p, ijf.q, inv);
    ordered_json meta;
    meta["mode"] = "inverse-julia";
    meta["p"] = ijf.p;
    meta["q"] = ijf.q;
    meta["c"] = complex_json(c);
    meta["region"] = region_meta(region, ijf.raster);
    meta["inverse_mode"] = ijf.mode;
    meta["iters"] = ijf.iters;
    meta["node_budget"] = ijf.node_budget;
    if (ijf.mode == "random") meta["seed"] = ijf.seed;
    write_raster_outputs(grid, ijf.raster, std::move(meta));
  });

  // ---- verify -------------------------------------------------------------
  auto* vf = app.add_subcommand("verify",
                                "Decide whether c is a Misiurewicz parameter");
  struct {
    int p = 2, q = 1, depth = 20;
    std::string c_text, json_path;
    double periodicity_tol = 1e-6, dedup_tol = 0.0, escape_radius = 0.0;
    std::size_t frontier_cap = 200000;
  } vff;
  vf->add_option("--p", vff.p, "Forward exponent p")->required();
  vf->add_option("--q", vff.q, "Backward exponent q")->required();
  vf->add_option("--c", vff.c_text, "Parameter c as RE,IM")->required();
  vf->add_option("--depth", vff.depth, "Certification depth")->capture_default_str();
  vf->add_option("--periodicity-tol", vff.periodicity_tol,
                 "Cycle detection tolerance")
      ->capture_default_str();
  vf->add_option("--dedup-tol", vff.dedup_tol,
                 "Frontier merge tolerance (0: 1e-9 * max(1, R))")
      ->capture_default_str();
  vf->add_option("--escape-radius", vff.escape_radius,
                 "Escape radius override (0: computed bound)")
      ->capture_default_str();
  vf->add_option("--frontier-cap", vff.frontier_cap, "Frontier size cap per level")
      ->capture_default_str();
  vf->add_option("--json", vff.json_path, "Write the report here (default: stdout)");
  vf->set_config("--config", "", "Read key=value defaults from a file");
  vf->callback([&] {
    corrdyn::MisiurewiczConfig cfg;
    cfg.orbit.depth = vff.depth;
    cfg.orbit.periodicity_tol = vff.periodicity_tol;
    cfg.orbit.dedup_tol = vff.dedup_tol;
    cfg.orbit.frontier_cap = vff.frontier_cap;
    if (vff.escape_radius > 0.0) cfg.orbit.escape_radius_override = vff.escape_radius;
    const corrdyn::Complex c = parse_complex_flag(vff.c_text, "--c");
    const corrdyn::MisiurewiczReport rep =
        corrdyn::verify_misiurewicz(c, vff.p, vff.q, cfg);
    emit_json(report_json(rep), vff.json_path);
    exit_code = rep.verdict ? 0 : 1;
  });

  // ---- scan ---------------------------------------------------------------
  auto* sc = app.add_subcommand("scan",
                                "Scan a parameter rectangle for candidate points");
  struct {
    int p = 2, q = 1, cols = 200, rows = 100, depth = 20, l_max = 12, n_max = 12;
    int threads = 0;
    std::string center_text, out;
    double half_width = 0.1, half_height = 0.0, scan_tol = 1e-2;
    double dedup_tol = 0.0, periodicity_tol = 1e-6;
    std::size_t frontier_cap = 200000;
  } scf;
  sc->add_option("--p", scf.p, "Forward exponent p")->required();
  sc->add_option("--q", scf.q, "Backward exponent q")->required();
  sc->add_option("--center", scf.center_text, "Region center as RE,IM")->required();
  sc->add_option("--half-width", scf.half_width, "Region half width")
      ->capture_default_str();
  sc->add_option("--half-height", scf.half_height,
                 "Region half height (default: same as half width)");
  sc->add_option("--cols", scf.cols, "Grid columns")->capture_default_str();
  sc->add_option("--rows", scf.rows, "Grid rows")->capture_default_str();
  sc->add_option("--depth", scf.depth, "Orbit depth per cell")->capture_default_str();
  sc->add_option("--l-max", scf.l_max, "Max pre-period in the residual window")
      ->capture_default_str();
  sc->add_option("--n-max", scf.n_max, "Max period in the residual window")
      ->capture_default_str();
  sc->add_option("--scan-tol", scf.scan_tol, "Residual threshold for candidates")
      ->capture_default_str();
  sc->add_option("--dedup-tol", scf.dedup_tol,
                 "Frontier merge tolerance (0: 1e-9 * max(1, R))")
      ->capture_default_str();
  sc->add_option("--threads", scf.threads,
                 "Worker threads (0: logical cores; env CORRDYN_THREADS)")
      ->capture_default_str();
  sc->add_option("--out", scf.out, "Write CSV here (default: stdout)");
  sc->set_config("--config", "", "Read key=value defaults from a file");
  sc->callback([&] {
    corrdyn::MisiurewiczConfig cfg;
    cfg.orbit.depth = scf.depth;
    cfg.orbit.dedup_tol = scf.dedup_tol;
    cfg.orbit.periodicity_tol = scf.periodicity_tol;
    cfg.orbit.frontier_cap = scf.frontier_cap;
    cfg.l_max = scf.l_max;
    cfg.n_max = scf.n_max;
    cfg.scan_tol = scf.scan_tol;
    cfg.threads = resolve_threads_flag(scf.threads);
    corrdyn::Region box;
    box.center = parse_complex_flag(scf.center_text, "--center");
    box.half_width = scf.half_width;
    box.half_height = scf.half_height > 0.0 ? scf.half_height : scf.half_width;
    const auto candidates =
        corrdyn::scan_candidates(box, scf.cols, scf.rows, scf.p, scf.q, cfg);
    std::ostringstream csv;
    corrdyn::write_candidates_csv(csv, candidates);
    if (scf.out.empty())
      std::cout << csv.str();
    else
      write_text(scf.out, csv.str());
  });

  // ---- refine -------------------------------------------------------------
  auto* rf = app.add_subcommand(
      "refine", "Newton-refine a scan candidate and re-verify the result");
  struct {
    int p = 2, q = 1, ell = 1, n = 1, depth = 20;
    std::string c_text, json_path;
    double periodicity_tol = 1e-6, dedup_tol = 0.0;
    std::size_t frontier_cap = 200000;
  } rff;
  rf->add_option("--p", rff.p, "Forward exponent p")->required();
  rf->add_option("--q", rff.q, "Backward exponent q")->required();
  rf->add_option("--c", rff.c_text, "Candidate parameter as RE,IM")->required();
  rf->add_option("--ell", rff.ell, "Candidate pre-period (critical-value indexing)")
      ->required();
  rf->add_option("--n", rff.n, "Candidate period")->required();
  rf->add_option("--depth", rff.depth, "Certification depth")->capture_default_str();
  rf->add_option("--periodicity-tol", rff.periodicity_tol,
                 "Cycle detection tolerance")
      ->capture_default_str();
  rf->add_option("--dedup-tol", rff.dedup_tol,
                 "Frontier merge tolerance (0: 1e-9 * max(1, R))")
      ->capture_default_str();
  rf->add_option("--json", rff.json_path, "Write the result here (default: stdout)");
  rf->set_config("--config", "", "Read key=value defaults from a file");
  rf->callback([&] {
    corrdyn::MisiurewiczConfig cfg;
    cfg.orbit.depth = rff.depth;
    cfg.orbit.periodicity_tol = rff.periodicity_tol;
    cfg.orbit.dedup_tol = rff.dedup_tol;
    cfg.orbit.frontier_cap = rff.frontier_cap;
    corrdyn::Candidate cand;
    cand.c = parse_complex_flag(rff.c_text, "--c");
    cand.ell = rff.ell;
    cand.n = rff.n;
    const corrdyn::RefineResult result =
        corrdyn::refine_candidate(cand, rff.p, rff.q, cfg);
    ordered_json j;
    j["c"] = complex_json(result.c);
    j["report"] = report_json(result.report);
    emit_json(j, rff.json_path);
    exit_code = result.report.verdict ? 0 : 1;
  });

  // ---- monodromy ----------------------------------------------------------
  auto* mo = app.add_subcommand(
      "monodromy", "Permutation of branches around the origin, cycle notation");
  struct {
    int p = 2, q = 1;
    double radius = 1.0, base_arg = 0.0;
  } mof;
  mo->add_option("--p", mof.p, "Forward exponent p")->required();
  mo->add_option("--q", mof.q, "Backward exponent q")->required();
  mo->add_option("--radius", mof.radius, "Loop radius")->capture_default_str();
  mo->add_option("--base-arg", mof.base_arg, "Basepoint argument in radians")
      ->capture_default_str();
  mo->callback([&] {
    const std::vector<int> perm = corrdyn::monodromy_permutation(
        corrdyn::CorrespondenceParams{mof.p, mof.q, corrdyn::Complex(0.0, 0.0)},
        mof.radius, mof.base_arg);
    std::vector<bool> seen(perm.size(), false);
    std::string out;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      if (seen[i] || perm[i] == static_cast<int>(i)) continue;
      out += '(';
      std::size_t j = i;
      bool first = true;
      while (!seen[j]) {
        seen[j] = true;
        if (!first) out += ' ';
        out += std::to_string(j);
        first = false;
        j = static_cast<std::size_t>(perm[j]);
      }
      out += ')';
    }
    if (out.empty()) out = "()";
    std::cout << out << "\n";
  });

  // ---- expansion ----------------------------------------------------------
  auto* ex = app.add_subcommand(
      "expansion", "Survey inverse-branch norms in the singular orbifold weight");
  struct {
    int p = 2, q = 1, verify_depth = 20, depth = 30, global_grid = 193;
    int inverse_level = 10, threads = 0;
    std::string c_text, json_path;
    double delta_in = 1e-4, delta_out = 1.0, delta_near = 0.05;
    std::uint64_t node_budget = 40'000'000;
    bool euclidean = false;
  } exf;
  ex->add_option("--p", exf.p, "Forward exponent p")->required();
  ex->add_option("--q", exf.q, "Backward exponent q")->required();
  ex->add_option("--c", exf.c_text, "Parameter c as RE,IM")->required();
  ex->add_option("--verify-depth", exf.verify_depth,
                 "Certification depth for the parameter")
      ->capture_default_str();
  ex->add_option("--depth", exf.depth, "Membership depth for survey samples")
      ->capture_default_str();
  ex->add_option("--delta-in", exf.delta_in, "Inner distance band")
      ->capture_default_str();
  ex->add_option("--delta-out", exf.delta_out, "Outer distance band (grid tier)")
      ->capture_default_str();
  ex->add_option("--delta-near", exf.delta_near, "Near-singular band defining eta")
      ->capture_default_str();
  ex->add_option("--global-grid", exf.global_grid, "Grid-tier resolution per axis")
      ->capture_default_str();
  ex->add_option("--inverse-level", exf.inverse_level,
                 "Backward-iteration level feeding the near tier")
      ->capture_default_str();
  ex->add_option("--node-budget", exf.node_budget,
                 "Refusal threshold on p^inverse-level")
      ->capture_default_str();
  ex->add_option("--threads", exf.threads,
                 "Worker threads (0: logical cores; env CORRDYN_THREADS)")
      ->capture_default_str();
  ex->add_flag("--euclidean", exf.euclidean,
               "Drop the orbifold weight (negative control)");
  ex->add_option("--json", exf.json_path, "Write the survey here (default: stdout)");
  ex->set_config("--config", "", "Read key=value defaults from a file");
  ex->callback([&] {
    const corrdyn::Complex c = parse_complex_flag(exf.c_text, "--c");
    const corrdyn::CorrespondenceParams par{exf.p, exf.q, c};
    ordered_json j;
    j["c"] = complex_json(c);
    j["euclidean"] = exf.euclidean;
    corrdyn::RamificationData data;
    if (!exf.euclidean) {
      corrdyn::MisiurewiczConfig vcfg;
      vcfg.orbit.depth = exf.verify_depth;
      const corrdyn::MisiurewiczReport rep =
          corrdyn::verify_misiurewicz(c, exf.p, exf.q, vcfg);
      if (!rep.verdict) {
        std::cerr << "expansion: parameter not verified ("
                  << corrdyn::to_string(rep.reason) << ")\n";
        exit_code = 1;
        return;
      }
      data = corrdyn::ramification_data(rep, par);
      ordered_json ram;
      ordered_json pts = ordered_json::array();
      for (const corrdyn::Complex a : data.points) pts.push_back(complex_json(a));
      ram["points"] = pts;
      ram["nu"] = data.nu;
      j["ramification"] = ram;
    } else {
      j["ramification"] = nullptr;
    }
    corrdyn::SampleSpec spec;
    spec.depth = exf.depth;
    spec.delta_in = exf.delta_in;
    spec.delta_out = exf.delta_out;
    spec.delta_near = exf.delta_near;
    spec.global_grid = exf.global_grid;
    spec.inverse_level = exf.inverse_level;
    spec.node_budget = exf.node_budget;
    spec.threads = resolve_threads_flag(exf.threads);
    const corrdyn::ExpansionSurvey survey = corrdyn::expansion_survey(par, data, spec);
    j["survey"] = survey_json(survey);
    emit_json(j, exf.json_path);
    // Contraction near the singular set is the surveyed property; report it
    // through the exit code for scripting.
    exit_code = (!exf.euclidean && survey.eta_estimate < 1.0) ||
                        (exf.euclidean && survey.samples > 0)
                    ? 0
                    : 1;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const corrdyn::CapacityError& e) {
    std::cerr << "corrdyn: " << e.what() << "\n";
    return 3;
  } catch (const corrdyn::BudgetError& e) {
    std::cerr << "corrdyn: " << e.what() << "\n";
    return 3;
  } catch (const corrdyn::IoError& e) {
    std::cerr << "corrdyn: " << e.what() << "\n";
    return 4;
  } catch (const corrdyn::InvalidArgument& e) {
    std::cerr << "corrdyn: " << e.what() << "\n";
    return 2;
  } catch (const corrdyn::Error& e) {
    std::cerr << "corrdyn: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "corrdyn: " << e.what() << "\n";
    return 5;
  }
  return exit_code;
}
