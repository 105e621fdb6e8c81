#include "fractree/cli.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "fractree/design.hpp"
#include "fractree/error.hpp"
#include "fractree/export.hpp"
#include "fractree/search.hpp"
#include "fractree/service.hpp"

namespace fractree {

namespace {

std::string g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

Range parse_range(const std::string& text, const std::string& flag) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument(text);
    std::size_t n1 = 0, n2 = 0;
    const std::string a = text.substr(0, colon), b = text.substr(colon + 1);
    Range r{std::stod(a, &n1), std::stod(b, &n2)};
    if (n1 != a.size() || n2 != b.size()) throw std::invalid_argument(text);
    if (!(r.lo < r.hi)) throw DomainError(flag, flag + " needs lo < hi");
    return r;
  } catch (const std::logic_error&) {
    throw DomainError(flag, flag + " expects lo:hi, got '" + text + "'");
  }
}

EmbeddingCheckOptions criterion_checks(const std::string& name) {
  if (name == "crossings") return {false, true};
  if (name == "clearance") return {true, false};
  if (name == "both") return {true, true};
  throw DomainError("criterion", "criterion must be crossings, clearance or both");
}

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Layered fractal tree designs for laser cutting", "fractree"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  // generate
  DesignRequest req;
  double r_flag = 0.0, lambda_flag = 0.0, margin_flag = 0.0;
  std::string scheme_name = "contract";
  std::string out_dir;
  if (const char* env = std::getenv("FRACTREE_OUT"); env && *env) out_dir = env;
  else out_dir = "./out";
  bool quiet = false;
  auto* gen = app.add_subcommand("generate", "Build, measure, validate and export a layer stack");
  gen->add_option("--p", req.params.p, "Edge length ratio")->capture_default_str();
  gen->add_option("--theta", req.params.theta, "Angle between sibling edges (degrees)")->capture_default_str();
  gen->add_option("--q", req.params.q, "Disk radius ratio")->capture_default_str();
  auto* r_opt = gen->add_option("--r", r_flag, "Root disk radius (default: largest that clears the margin)");
  gen->add_option("--depth", req.params.depth, "Tree depth D")->capture_default_str();
  gen->add_option("--scheme", scheme_name, "growth or contract")->capture_default_str();
  auto* lambda_opt = gen->add_option("--lambda", lambda_flag, "Contract inflation factor");
  gen->add_option("--top-fill", req.top_fill, "Top root disk radius as a fraction of the plate")->capture_default_str();
  gen->add_option("--plate-radius", req.plate_radius, "Plate radius in model units")->capture_default_str();
  gen->add_option("--plate-diameter", req.plate_diameter_mm, "Plate diameter in mm")->capture_default_str();
  gen->add_option("--min-bridge", req.material.min_bridge_mm, "Minimum bridge width in mm")->capture_default_str();
  gen->add_option("--kerf", req.material.kerf_mm, "Laser kerf in mm")->capture_default_str();
  gen->add_option("--bed", req.material.bed_diameter_mm, "Usable bed diameter in mm")->capture_default_str();
  auto* margin_opt = gen->add_option("--margin", margin_flag, "Embedding clearance margin (model units)");
  gen->add_option("--seed", req.seed, "Sampler seed")->capture_default_str();
  gen->add_option("--budget", req.budget, "Samples per layer for visible areas")->capture_default_str();
  gen->add_option("--out", out_dir, "Output directory (default $FRACTREE_OUT or ./out)");
  gen->add_flag("--critical-p-hint", req.critical_p_hint, "Also report the critical p for this theta and q");
  gen->add_flag("--quiet", quiet, "Only print failures");

  // search
  auto* search = app.add_subcommand("search", "Parameter searches");
  search->require_subcommand(1);

  CriticalPOptions cp;
  std::string cp_criterion = "crossings";
  auto* crit = search->add_subcommand("critical-p", "Largest p for which the embedding stays feasible");
  crit->add_option("--theta", cp.theta)->capture_default_str();
  crit->add_option("--q", cp.q)->capture_default_str();
  crit->add_option("--r", cp.r)->capture_default_str();
  crit->add_option("--depth", cp.depth)->capture_default_str();
  crit->add_option("--margin", cp.margin)->capture_default_str();
  crit->add_option("--tol", cp.tol)->capture_default_str();
  crit->add_option("--p-lo", cp.p_lo)->capture_default_str();
  crit->add_option("--p-hi", cp.p_hi)->capture_default_str();
  crit->add_option("--criterion", cp_criterion, "crossings, clearance or both")->capture_default_str();

  ParamSet mr;
  double mr_margin = kDefaultMarginFraction;
  auto* maxr = search->add_subcommand("max-radius", "Largest root radius whose disks clear the margin");
  maxr->add_option("--p", mr.p)->capture_default_str();
  maxr->add_option("--theta", mr.theta)->capture_default_str();
  maxr->add_option("--q", mr.q)->capture_default_str();
  maxr->add_option("--depth", mr.depth)->capture_default_str();
  maxr->add_option("--margin", mr_margin)->capture_default_str();

  FeasibilityMapOptions fm;
  std::string p_range = "0.4:0.8", q_range = "0.4:0.8", field = "feasible", fm_criterion = "both", fm_out;
  int res = 20;
  double fm_r = 0.0;
  auto* fmap = search->add_subcommand("feasibility-map", "Feasibility over a (p, q) grid as CSV");
  fmap->add_option("--p", p_range, "p range lo:hi")->capture_default_str();
  fmap->add_option("--q", q_range, "q range lo:hi")->capture_default_str();
  fmap->add_option("--res", res, "Grid points per axis")->capture_default_str();
  fmap->add_option("--theta", fm.theta)->capture_default_str();
  fmap->add_option("--depth", fm.depth)->capture_default_str();
  fmap->add_option("--margin", fm.margin)->capture_default_str();
  auto* fm_r_opt = fmap->add_option("--r", fm_r, "Fixed root radius (default: per-cell maximum)");
  fmap->add_option("--field", field, "feasible, clearance or radius")->capture_default_str();
  fmap->add_option("--criterion", fm_criterion, "crossings, clearance or both")->capture_default_str();
  fmap->add_option("--out", fm_out, "Write CSV to this file instead of stdout");

  ServiceOptions so;
  std::string static_dir;
  auto* serve = app.add_subcommand("serve", "Local HTTP service for the browser UI");
  serve->add_option("--port", so.port)->capture_default_str();
  serve->add_option("--host", so.host)->capture_default_str();
  serve->add_option("--static", static_dir, "Directory of UI assets to serve at /");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) {
      if (*r_opt) req.r = r_flag;
      if (*lambda_opt) req.lambda = lambda_flag;
      if (*margin_opt) req.margin = margin_flag;
      req.scheme = scheme_from_string(scheme_name);
      const Design d = run_design(req);
      const auto files = write_outputs(d, out_dir);
      if (!quiet) {
        out << "wrote " << files.size() << " files to " << out_dir << "\n";
        out << "scheme " << to_string(d.stack.scheme) << ", r " << g9(d.params.r) << ", lambda "
            << g9(d.stack.lambda) << ", clearance " << g9(d.report.embedding.clearance.gap) << "\n";
        for (std::size_t i = 0; i < d.metrics.size(); ++i) {
          out << "layer " << i << ": visible " << g9(d.metrics[i].visible_fraction) << ", bridge "
              << g9(d.report.layers[i].bridge_mm) << " mm\n";
        }
        if (d.critical_p) out << "critical p " << g9(d.critical_p->p) << "\n";
      }
      for (const auto& m : d.report.messages) err << m << "\n";
      out << (d.report.pass ? "constraints: pass\n" : "constraints: FAIL\n");
      return d.report.pass ? kExitOk : kExitConstraintFail;
    }

    if (*crit) {
      cp.checks = criterion_checks(cp_criterion);
      const auto result = critical_p(cp);
      out << "p* " << g9(result.p) << "\n";
      out << "bracket " << g9(result.lo) << " " << g9(result.hi) << "\n";
      out << "iterations " << result.iterations << "\n";
      out << "non_monotone " << (result.non_monotone ? "true" : "false") << "\n";
      for (const auto& probe : result.probes)
        out << "probe " << g9(probe.p) << " " << (probe.feasible ? "feasible" : "infeasible") << "\n";
      return kExitOk;
    }

    if (*maxr) {
      mr.validate();
      if (!(mr_margin >= 0.0)) throw DomainError("margin", "margin must be non-negative");
      const auto result = maximize_radius(build_embedding(mr), mr.q, mr_margin);
      out << "r* " << g9(result.r) << "\n";
      out << "witness " << result.vertex_a << " " << result.vertex_b << "\n";
      return kExitOk;
    }

    if (*fmap) {
      const Range pr = parse_range(p_range, "--p"), qr = parse_range(q_range, "--q");
      if (res < 2) throw DomainError("res", "--res must be at least 2");
      if (field != "feasible" && field != "clearance" && field != "radius")
        throw DomainError("field", "field must be feasible, clearance or radius");
      fm.p_min = pr.lo, fm.p_max = pr.hi, fm.q_min = qr.lo, fm.q_max = qr.hi;
      fm.p_res = fm.q_res = res;
      fm.checks = criterion_checks(fm_criterion);
      if (*fm_r_opt) fm.fixed_r = fm_r;
      const auto map = feasibility_map(fm);

      std::ostringstream csv;
      csv << "q\\p";
      for (double p : map.p_axis) csv << "," << g9(p);
      csv << "\n";
      for (std::size_t qi = 0; qi < map.q_axis.size(); ++qi) {
        csv << g9(map.q_axis[qi]);
        for (std::size_t pi = 0; pi < map.p_axis.size(); ++pi) {
          const auto c = map.cell(qi, pi);
          csv << ",";
          if (field == "feasible") csv << (map.feasible[c] ? 1 : 0);
          else if (field == "clearance") csv << g9(map.clearance[c]);
          else csv << g9(map.radius[c]);
        }
        csv << "\n";
      }
      if (fm_out.empty()) {
        out << csv.str();
      } else {
        std::ofstream f(fm_out, std::ios::binary | std::ios::trunc);
        f << csv.str();
        if (!f) throw Error("io_error", "cannot write " + fm_out, "out");
      }
      return kExitOk;
    }

    if (*serve) {
      if (!static_dir.empty()) so.static_dir = static_dir;
      Service service(so);
      if (service.bind() < 0) throw Error("io_error", "cannot bind " + so.host + ":" + std::to_string(so.port), "port");
      g_stop = false;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::thread watcher([&service] {
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        service.stop();
      });
      out << "listening on http://" << so.host << ":" << service.port() << "\n" << std::flush;
      service.run();
      g_stop = true;
      watcher.join();
      return kExitOk;
    }
  } catch (const BracketError& e) {
    err << "error: " << e.what() << " (clearance " << g9(e.lo_clearance()) << " at p-lo, " << g9(e.hi_clearance())
        << " at p-hi); widen --p-lo/--p-hi or change the criterion\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error [" << e.code() << "]";
    if (!e.field().empty()) err << " " << e.field();
    err << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace fractree
