#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hdd/checkpoint.hpp"
#include "hdd/config.hpp"
#include "hdd/diffusion.hpp"
#include "hdd/error.hpp"
#include "hdd/footprint.hpp"
#include "hdd/grid_io.hpp"
#include "hdd/klcheck.hpp"
#include "hdd/metrics.hpp"
#include "hdd/parse.hpp"
#include "hdd/schedules.hpp"
#include "hdd/spectral.hpp"
#include "hdd/synth.hpp"

namespace fs = std::filesystem;
using namespace hdd;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

// Returned by a subcommand whose checks ran but did not pass.
struct CheckFailed {};

std::string flag_name(const std::string& key) {
  std::string s = key;
  for (char& ch : s)
    if (ch == '_') ch = '-';
  return "--" + s;
}

struct Options {
  std::string config_path;
  std::vector<std::string> sets;
  bool print_config = false;
  std::map<std::string, std::string> key_flags;
};

Config resolve_config(const Options& o, const CLI::App& app) {
  Config c;
  if (!o.config_path.empty()) {
    c.load(o.config_path);
  } else if (const char* env = std::getenv("HDD_CONFIG"); env && *env) {
    c.load(fs::path(env));
  }
  for (const std::string& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InvalidArgument("--set expects key=value, got '" + kv + "'");
    c.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
  for (const auto& [key, value] : o.key_flags)
    if (app.count(flag_name(key)) > 0) c.set(key, value);
  return c;
}

int as_int(const Config& c, const std::string& key) { return static_cast<int>(c.integer(key)); }

std::vector<TrainingPair> read_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.csv");
  if (!in) throw InvalidArgument("cannot open '" + (dir / "manifest.csv").string() + "'");
  std::string line;
  std::getline(in, line);
  if (trim(line) != "index,fine,coarse")
    throw InvalidArgument((dir / "manifest.csv").string() + ": expected header 'index,fine,coarse'");
  std::vector<TrainingPair> pairs;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string idx, fine, coarse;
    std::getline(ss, idx, ',');
    std::getline(ss, fine, ',');
    std::getline(ss, coarse, ',');
    if (fine.empty() || coarse.empty()) throw InvalidArgument((dir / "manifest.csv").string() + ": malformed row '" + line + "'");
    pairs.push_back({read_grid(dir / trim(coarse)), read_grid(dir / trim(fine))});
  }
  if (pairs.empty()) throw InvalidArgument((dir / "manifest.csv").string() + ": no pairs listed");
  return pairs;
}

std::string index_name(const char* prefix, std::uint64_t i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%05llu.hddg", prefix, static_cast<unsigned long long>(i));
  return buf;
}

fs::path member_path(const fs::path& out, int k) {
  return out.parent_path() / (out.stem().string() + "_m" + std::to_string(k) + out.extension().string());
}

Grid mean_of(const std::vector<Grid>& members) {
  std::vector<double> acc(members.front().size(), 0.0);
  for (const Grid& g : members)
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g.values()[i] / static_cast<double>(members.size());
  return members.front().with_data(std::move(acc));
}

// ---- subcommands ----------------------------------------------------------

struct SynthArgs {
  std::string out;
  std::uint64_t first_index = 0;
  std::string clim_out;
  int wet_month = 1;
  double amplitude = 4.0;
};

void run_synth(const Config& c, const SynthArgs& a) {
  if (!a.clim_out.empty()) {
    const PowerLawSpec spec = synth_from(c);
    write_grid(monthly_toy_climatology(c.uint("seed"), spec.height, spec.width, a.wet_month, a.amplitude).to_grid(),
               fs::path(a.clim_out));
    std::cout << "wrote " << a.clim_out << "\n";
    return;
  }
  if (a.out.empty()) throw InvalidArgument("synth: --out DIR is required (or --climatology FILE)");
  const PowerLawSpec spec = synth_from(c);
  const int factor = as_int(c, "synth.factor");
  const int count = as_int(c, "synth.count");
  if (count < 0) throw InvalidArgument("synth.count must be >= 0");
  const auto pairs = make_pairs(spec, factor, count, a.first_index);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  std::ofstream manifest(dir / "manifest.csv");
  manifest << "index,fine,coarse\n";
  for (int j = 0; j < count; ++j) {
    const std::uint64_t i = a.first_index + j;
    write_grid(pairs[j].fine, dir / index_name("fine", i));
    write_grid(pairs[j].coarse, dir / index_name("coarse", i));
    manifest << i << ',' << index_name("fine", i) << ',' << index_name("coarse", i) << '\n';
  }
  if (!manifest) throw std::runtime_error("synth: failed writing manifest");
  std::cout << "wrote " << count << " pairs to " << dir.string() << "\n";
}

struct TrainArgs {
  std::string data, out, loss_curve;
};

void run_train(const Config& c, const TrainArgs& a) {
  const auto pairs = read_manifest(a.data);
  const TrainConfig tc = train_from(c);
  const ToyArchitecture arch = architecture_from(c, pairs.front().fine.channels(), pairs.front().coarse.channels());
  const ToyDenoiser init = ToyDenoiser::initialized(arch, c.uint("seed"));
  const TrainResult r = train(init, pairs, tc, [](int e, double l) {
    std::cerr << "epoch " << e + 1 << " loss " << l << "\n";
  });
  std::ostringstream printed;
  c.print(printed);
  write_checkpoint(r.model, {tc.epochs, tc.seed, fnv1a_hex(printed.str())}, fs::path(a.out));
  if (!a.loss_curve.empty()) {
    std::ofstream lc(a.loss_curve);
    write_loss_curve(r.loss_curve, lc);
  }
  std::cout << "final loss " << r.loss_curve.back() << "\nwrote " << a.out << "\n";
}

struct SampleArgs {
  std::string model, cond, out, log;
  int factor = 0;
  bool vanilla = false;
};

void run_sample(const Config& c, const SampleArgs& a) {
  const Checkpoint ck = read_checkpoint(fs::path(a.model));
  const Grid coarse = read_grid(fs::path(a.cond));
  const int factor = a.factor > 0 ? a.factor : as_int(c, "synth.factor");
  const Shape full{coarse.height() * factor, coarse.width() * factor};
  const Grid cond = upsample(coarse, full);
  const NoiseSchedule noise = noise_from(c);
  const ShapeSchedule shapes = shapes_from(c, full.h, full.w, noise.steps());
  const ChurnParams churn = churn_from(c);
  const int members = as_int(c, "sampler.members");
  if (members < 1) throw InvalidArgument("sampler.members must be >= 1");
  const std::uint64_t seed = c.uint("seed");

  std::vector<Grid> out;
  RunLog log;
  for (int k = 0; k < members; ++k) {
    SampleOptions opt{mode_from(c), k == 0 ? &log : nullptr};
    const std::uint64_t s = member_seed(seed, k);
    out.push_back(a.vanilla ? vanilla_sample(ck.model, cond, noise, churn, s, opt)
                            : sample(ck.model, cond, noise, shapes, churn, s, opt));
  }
  const fs::path path(a.out);
  if (members == 1) {
    write_grid(out.front(), path);
  } else {
    for (int k = 0; k < members; ++k) write_grid(out[k], member_path(path, k));
    write_grid(mean_of(out), path);
  }
  if (!a.log.empty()) {
    std::ofstream lf(a.log);
    lf << "t,h,w,sigma\n" << std::setprecision(17);
    for (const NetworkCall& call : log.calls) lf << call.t << ',' << call.shape.h << ',' << call.shape.w << ',' << call.sigma << '\n';
  }
  const PixelCount pc = count_pixels(log);
  std::cout << "pixels " << pc.total << " alpha " << pc.alpha << "\nwrote " << a.out << "\n";
}

struct SpeedupArgs {
  std::string kind;
  int H = 0, W = 0, T = 0, k = 0;
  bool table = false;
};

void run_speedup(const Config& c, const SpeedupArgs& a) {
  const ShapeKind kind = parse_shape_kind(a.kind.empty() ? c.get("shapes.kind") : a.kind);
  const int H = a.H > 0 ? a.H : as_int(c, "synth.height");
  const int W = a.W > 0 ? a.W : as_int(c, "synth.width");
  const int T = a.T > 0 ? a.T : as_int(c, "noise.steps");
  const int k = a.k > 0 ? a.k : as_int(c, "shapes.k");
  const ShapeSchedule s = make_shapes(kind, H, W, T, k);
  std::cout << std::setprecision(6) << "kind " << to_string(kind) << " H " << H << " W " << W << " T " << T << "\n"
            << "alpha " << normalized_mean_area(s) << "\nS " << speedup(s) << "\n";
  if (a.table) write_schedule_table(std::cout, s, noise_from(c).steps() == T ? noise_from(c) : karras_sigmas(
      c.real("noise.sigma_min"), c.real("noise.sigma_max"), c.real("noise.rho"), T));
}

struct RapsdArgs {
  std::string in, out;
  int channel = 0;
  double fit_lo = 0.0, fit_hi = 0.0, noise_sigma = 0.0;
};

void run_rapsd(const Config& c, const RapsdArgs& a) {
  const Spectrum s = rapsd(read_grid(fs::path(a.in)), a.channel, rapsd_from(c));
  if (a.out.empty()) {
    write_spectrum_csv(s, std::cout);
  } else {
    std::ofstream f(a.out);
    write_spectrum_csv(s, f);
  }
  std::ostream& info = a.out.empty() ? std::cerr : std::cout;
  if (a.fit_hi > a.fit_lo) {
    const PowerLawFit fit = fit_power_law(s, a.fit_lo, a.fit_hi);
    info << "slope " << -fit.alpha << " (alpha " << fit.alpha << ", " << fit.bins_used << " bins)\n";
  }
  if (a.noise_sigma > 0.0) info << "hinge " << hinge_frequency(s, a.noise_sigma) << "\n";
}

struct EvalArgs {
  std::vector<std::string> pred;
  std::string obs;
  bool no_fail = false;
};

void run_eval(const Config& c, const EvalArgs& a) {
  const Grid obs = read_grid(fs::path(a.obs));
  std::vector<Grid> preds;
  for (const auto& p : a.pred) preds.push_back(read_grid(fs::path(p)));
  const std::vector<double> w = area_weights(obs);
  std::cout << std::setprecision(6);
  if (obs.channels() == 12) {
    const auto o = MonthlyClimatology::from_grid(obs);
    const auto p = MonthlyClimatology::from_grid(preds.front());
    const Scorecard s = scorecard(p, o, w, parse_nrmse_mode(c.get("eval.nrmse_mode")));
    auto line = [](const char* name, double v, bool ok) {
      std::cout << name << ' ' << v << ' ' << (ok ? "pass" : "fail") << '\n';
    };
    line("mape", s.mape, s.mape_pass);
    line("scor", s.scor, s.scor_pass);
    line("nrmse", s.nrmse, s.nrmse_pass);
    line("mad", s.mad, s.mad_pass);
    std::cout << (s.overall ? "PASS " : "FAIL ") << s.passed() << "/4\n";
    if (!s.overall && !a.no_fail) throw CheckFailed{};
    return;
  }
  const double range = c.real("eval.data_range");
  std::cout << "rmse " << rmse(preds.front(), obs) << '\n'
            << "psnr " << (range > 0.0 ? psnr(preds.front(), obs, range) : psnr(preds.front(), obs)) << '\n';
  if (preds.size() >= 2) std::cout << "crps " << crps(preds, obs, w) << '\n';
}

void run_klcheck(const Config& c) {
  const auto n = c.integer("klcheck.instances"), m = c.integer("klcheck.max_support");
  if (n < 1 || m < 1) throw InvalidArgument("klcheck.instances and klcheck.max_support must be >= 1");
  const kl::CampaignSummary s = kl::run_campaign(n, m, c.uint("seed"));
  std::cout << std::setprecision(3) << "instances " << s.instances << "\nmax_abs_residual " << s.max_abs_residual
            << "\nmax_abs_telescoping_residual " << s.max_abs_telescoping_residual << "\nmin_summand " << s.min_summand
            << "\ndpi_violations " << s.dpi_violations << '\n';
  const bool ok = s.max_abs_residual < 1e-10 && s.max_abs_telescoping_residual < 1e-10 && s.min_summand >= -1e-12 &&
                  s.dpi_violations == 0;
  std::cout << (ok ? "PASS" : "FAIL") << '\n';
  if (!ok) throw CheckFailed{};
}

struct FootprintArgs {
  std::string device, log;
  double hours = -1.0, ksu = -1.0;
};

void run_footprint(const Config& c, const FootprintArgs& a) {
  const EmissionFactors f = factors_from(c);
  const double overhead = c.real("footprint.overhead");
  auto show = [](const std::string& what, const Emissions& e) {
    std::cout << what << ": " << std::fixed << std::setprecision(3) << e.kwh << " kWh, " << std::setprecision(2) << e.kg
              << " kg CO2e\n";
  };
  if (!a.log.empty()) {
    std::ifstream in(a.log);
    if (!in) throw InvalidArgument("cannot open run log '" + a.log + "'");
    show("run log", run_emissions(read_run_log(in), f, overhead));
  } else if (!a.device.empty() || a.hours >= 0.0) {
    if (a.device.empty()) throw InvalidArgument("footprint: --hours needs --device");
    const double h = a.hours >= 0.0 ? a.hours : 1.0;
    Emissions e = gpu_hours_emissions(a.device, h, f);
    e.kwh *= 1.0 + overhead;
    e.kg *= 1.0 + overhead;
    show(a.device + " x " + std::to_string(h) + " h", e);
  } else if (a.ksu >= 0.0) {
    show(std::to_string(a.ksu) + " kSU", cpu_ksu_emissions(a.ksu, f));
  } else {
    for (const auto& [dev, kw] : f.power_kw) show(dev + " per hour", gpu_hours_emissions(dev, 1.0, f));
    show("per kSU", cpu_ksu_emissions(1.0, f));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical diffusion downscaling toolkit"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  Options opt;
  app.add_option("--config", opt.config_path, "configuration file (default: $HDD_CONFIG)");
  app.add_option("--set", opt.sets, "override a key: --set key=value (repeatable)");
  app.add_flag("--print-effective-config", opt.print_config, "print the resolved configuration and exit");
  for (const KeySpec& k : config_keys()) {
    opt.key_flags[k.key];
    app.add_option(flag_name(k.key), opt.key_flags[k.key], k.help + " [" + k.default_value + "]")->group("Config keys");
  }

  SynthArgs synth_a;
  auto* synth = app.add_subcommand("synth", "generate synthetic power-law training pairs");
  synth->add_option("--out", synth_a.out, "output directory");
  synth->add_option("--first-index", synth_a.first_index, "index of the first field (use a distinct range for held-out sets)");
  synth->add_option("--climatology", synth_a.clim_out, "write a 12-month toy climatology grid instead");
  synth->add_option("--wet-month", synth_a.wet_month, "peak month of the toy climatology")->check(CLI::Range(1, 12));
  synth->add_option("--amplitude", synth_a.amplitude, "seasonal amplitude of the toy climatology");

  TrainArgs train_a;
  auto* trn = app.add_subcommand("train", "train the toy denoiser with the hierarchical loss");
  trn->add_option("--data", train_a.data, "directory with manifest.csv")->required();
  trn->add_option("--out", train_a.out, "checkpoint path")->required();
  trn->add_option("--loss-curve", train_a.loss_curve, "CSV of the mean loss per epoch");

  SampleArgs sample_a;
  auto* smp = app.add_subcommand("sample", "downscale a coarse grid with the hierarchical sampler");
  smp->add_option("--model", sample_a.model, "checkpoint")->required();
  smp->add_option("--cond", sample_a.cond, "coarse conditioning grid")->required();
  smp->add_option("--out", sample_a.out, "output grid (ensemble mean when sampler.members > 1)")->required();
  smp->add_option("--factor", sample_a.factor, "upscaling factor [synth.factor]");
  smp->add_option("--log", sample_a.log, "CSV of network calls (t,h,w,sigma)");
  smp->add_flag("--vanilla", sample_a.vanilla, "use the non-hierarchical reference sampler");
  std::string shapes_alias;
  smp->add_option("--shapes", shapes_alias, "shorthand for --shapes.kind");

  SpeedupArgs speed_a;
  auto* spd = app.add_subcommand("speedup", "normalized mean area and ideal speed-up of a shape schedule");
  spd->add_option("--kind", speed_a.kind, "identity | equal | unit | tandem [shapes.kind]");
  spd->add_option("--H", speed_a.H, "full height [synth.height]");
  spd->add_option("--W", speed_a.W, "full width [synth.width]");
  spd->add_option("--T", speed_a.T, "steps [noise.steps]");
  spd->add_option("--k", speed_a.k, "denoising steps per shape step (tandem) [shapes.k]");
  spd->add_flag("--table", speed_a.table, "print the per-step schedule");

  RapsdArgs rapsd_a;
  auto* rps = app.add_subcommand("rapsd", "radially averaged power spectrum of a grid");
  rps->add_option("--in", rapsd_a.in, "grid")->required();
  rps->add_option("--channel", rapsd_a.channel, "channel index");
  rps->add_option("--out", rapsd_a.out, "CSV path (default stdout)");
  rps->add_option("--fit-lo", rapsd_a.fit_lo, "lower frequency of the power-law fit");
  rps->add_option("--fit-hi", rapsd_a.fit_hi, "upper frequency of the power-law fit");
  rps->add_option("--noise-sigma", rapsd_a.noise_sigma, "report the hinge frequency for this noise level");

  EvalArgs eval_a;
  auto* evl = app.add_subcommand("eval", "score predictions against observations");
  evl->add_option("--pred", eval_a.pred, "prediction grid (repeat for an ensemble)")->required();
  evl->add_option("--obs", eval_a.obs, "observation grid")->required();
  evl->add_flag("--no-fail", eval_a.no_fail, "exit 0 even when the scorecard fails");

  auto* klc = app.add_subcommand("klcheck", "random-instance check of the KL chain rule and telescoping sum");

  FootprintArgs fp_a;
  auto* fpt = app.add_subcommand("footprint", "energy and CO2 estimates");
  fpt->add_option("--device", fp_a.device, "device name (A100, V100, cpu, or a footprint.power.* key)");
  fpt->add_option("--hours", fp_a.hours, "device hours");
  fpt->add_option("--ksu", fp_a.ksu, "thousands of CPU service units");
  fpt->add_option("--log", fp_a.log, "CSV run log with header device,hours");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (!shapes_alias.empty()) opt.sets.push_back("shapes.kind=" + shapes_alias);
    const Config c = resolve_config(opt, app);
    if (opt.print_config) {
      c.print(std::cout);
      return 0;
    }
    if (app.get_subcommands().empty()) throw InvalidArgument("a subcommand is required (see --help)");
    if (synth->parsed()) run_synth(c, synth_a);
    if (trn->parsed()) run_train(c, train_a);
    if (smp->parsed()) run_sample(c, sample_a);
    if (spd->parsed()) run_speedup(c, speed_a);
    if (rps->parsed()) run_rapsd(c, rapsd_a);
    if (evl->parsed()) run_eval(c, eval_a);
    if (klc->parsed()) run_klcheck(c);
    if (fpt->parsed()) run_footprint(c, fp_a);
    return 0;
  } catch (const CheckFailed&) {
    return kExitValidation;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DivisionByZero& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DegenerateField& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
