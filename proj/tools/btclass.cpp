// btclass: simulate, fit, predict, evaluate, rank-select and sweep for the
// tensor classifiers. Exit status 0 on success, 1 on usage errors, 2 on
// runtime errors; errors are reported as one line on stderr.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "btc/io.hpp"
#include "btc/simgen.hpp"
#include "btc/study.hpp"

namespace {

using namespace btc;

struct UsageError : Error {
  using Error::Error;
};

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

// Values such as "0.5", "1/9" or "3^-0.1".
double parse_value(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw UsageError("cannot parse value '" + text + "'");
    return v;
  };
  if (auto k = text.find('/'); k != std::string::npos) {
    return number(text.substr(0, k)) / number(text.substr(k + 1));
  }
  if (auto k = text.find('^'); k != std::string::npos) {
    return std::pow(number(text.substr(0, k)), number(text.substr(k + 1)));
  }
  return number(text);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  if (out.empty()) throw UsageError("empty list '" + text + "'");
  return out;
}

fs::path replicate_dir(const fs::path& root, std::size_t replicates, std::size_t k) {
  if (replicates <= 1) return root;
  char name[32];
  std::snprintf(name, sizeof name, "rep-%03zu", k);
  return root / name;
}

// A dataset directory, or a simulation directory holding `role`/.
fs::path resolve_dataset(const fs::path& path, const char* role) {
  if (fs::exists(path / "meta.json")) return path;
  if (fs::exists(path / role / "meta.json")) return path / role;
  throw FormatError("no dataset found at '" + path.string() + "' (looked for meta.json and " +
                    role + "/meta.json)");
}

fs::path resolve_truth(const fs::path& path) {
  if (fs::exists(path / "B.tsr")) return path;
  if (fs::exists(path / "truth" / "B.tsr")) return path / "truth";
  throw FormatError("no ground truth found at '" + path.string() + "'");
}

// Flat key=value config file expanded into --key=value arguments placed
// directly after the subcommand name, so flags given on the command line win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  for (std::size_t k = 1; k < args.size(); ++k) {
    std::string file;
    std::size_t span = 0;
    if (args[k] == "--config" && k + 1 < args.size()) {
      file = args[k + 1];
      span = 2;
    } else if (args[k].rfind("--config=", 0) == 0) {
      file = args[k].substr(9);
      span = 1;
    } else {
      continue;
    }
    std::ifstream in(file);
    if (!in) throw UsageError("cannot read config file '" + file + "'");
    std::vector<std::string> expanded;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw UsageError(file + ":" + std::to_string(line_no) + ": expected key=value");
      }
      auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      std::string key = trim(line.substr(0, eq));
      std::replace(key.begin(), key.end(), '_', '-');
      expanded.push_back("--" + key + "=" + trim(line.substr(eq + 1)));
    }
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(k),
               args.begin() + static_cast<std::ptrdiff_t>(k + span));
    args.insert(args.begin() + 2, expanded.begin(), expanded.end());
    break;
  }
  return args;
}

struct Clock {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
  int scenario = 2;
  std::string loss = "svm";
  std::size_t n = 400;
  std::uint64_t seed = 1;
  std::vector<std::size_t> dims{48, 48};
  std::size_t true_rank = 3;
  std::size_t extra_covariates = 0;
  double train_fraction = 0.7;
  std::size_t replicates = 1;
  std::size_t threads = 1;
  std::string out;
};

int run_simulate(const SimulateArgs& a) {
  const Clock clock;
  SimulationSpec spec;
  spec.scenario.id = a.scenario;
  spec.scenario.dims = a.dims;
  spec.scenario.true_rank = a.true_rank;
  spec.scenario.seed = a.seed;
  spec.loss = parse_outcome_loss(a.loss);
  spec.n = a.n;
  spec.extra_covariates = a.extra_covariates;
  spec.train_fraction = a.train_fraction;
  spec.scenario.validate();

  const fs::path root(a.out);
  parallel_for(a.replicates, a.threads, [&](std::size_t k) {
    SimulationSpec s = spec;
    s.replicate = static_cast<std::uint32_t>(k);
    const SimulatedData sim = simulate(s);
    const fs::path dir = replicate_dir(root, a.replicates, k);
    json meta = {{"scenario", s.scenario.id},
                 {"loss", to_string(s.loss)},
                 {"seed", s.scenario.seed},
                 {"replicate", k}};
    meta["role"] = "train";
    write_dataset(dir / "train", sim.train, meta);
    meta["role"] = "test";
    write_dataset(dir / "test", sim.test, meta);
    write_truth(dir / "truth", *sim.train.truth);
  });

  RunManifest m;
  m.command = "simulate";
  m.config = {{"scenario", a.scenario}, {"loss", a.loss},      {"n", a.n},
              {"seed", a.seed},         {"dims", a.dims},      {"true_rank", a.true_rank},
              {"extra_covariates", a.extra_covariates},        {"train_fraction", a.train_fraction},
              {"replicates", a.replicates}};
  m.seed = a.seed;
  m.dataset_hash = sha256_hex(encode_tsr1(gen_scenario(spec.scenario)));
  if (a.scenario == 2) m.config["scenario2_asset_sha256"] = kScenario2AssetSha256;
  m.elapsed_seconds = clock.seconds();
  m.files = list_files(root);
  m.write(root / "manifest.json");
  std::cout << "wrote " << a.replicates << " replicate(s) to " << root.string() << "\n";
  return 0;
}

// ---- fit --------------------------------------------------------------------

struct FitArgs {
  std::string model = "bt-svm";
  std::size_t rank = 3;
  std::size_t iters = 3000;
  std::size_t burnin = 1000;
  std::size_t thin = 1;
  double sigma2 = 6.0;
  std::uint64_t seed = 1;
  double gamma_precision = 0.01;
  double init_scale = 0.1;
  std::string init;
  std::optional<double> alpha, a_tau, b_tau, a_lambda, b_lambda;
  bool random_scan = false;
  bool keep_margins = false;
  std::size_t replicates = 1;
  std::size_t threads = 1;
  std::string data;
  std::string out;
};

void add_fit_options(CLI::App* cmd, FitArgs& a) {
  cmd->add_option("--model", a.model, "bt-svm or bt-lr")->capture_default_str();
  cmd->add_option("--rank", a.rank, "PARAFAC rank")->capture_default_str();
  cmd->add_option("--iters", a.iters, "total Gibbs sweeps")->capture_default_str();
  cmd->add_option("--burnin", a.burnin, "discarded sweeps")->capture_default_str();
  cmd->add_option("--thin", a.thin, "keep every k-th draw")->capture_default_str();
  cmd->add_option("--sigma2", a.sigma2, "hinge scale (bt-svm)")->capture_default_str();
  cmd->add_option("--seed", a.seed, "RNG seed")->capture_default_str();
  cmd->add_option("--gamma-precision", a.gamma_precision, "prior precision of gamma")
      ->capture_default_str();
  cmd->add_option("--init-scale", a.init_scale, "sd of the random margin initialization")
      ->capture_default_str();
  cmd->add_option("--init", a.init, "warm-start margins (TSRM file)");
  cmd->add_option("--alpha", a.alpha, "Dirichlet concentration (default 1/R)");
  cmd->add_option("--a-tau", a.a_tau, "tau shape (default R alpha)");
  cmd->add_option("--b-tau", a.b_tau, "tau rate (default alpha R^(1/D))");
  cmd->add_option("--a-lambda", a.a_lambda, "lambda shape (default 3)");
  cmd->add_option("--b-lambda", a.b_lambda, "lambda rate (default a_lambda^(1/(2D)))");
  cmd->add_flag("--random-scan", a.random_scan, "randomize the margin update order");
  cmd->add_flag("--keep-margins", a.keep_margins, "store raw margin draws");
}

FitConfig make_fit_config(const FitArgs& a, std::size_t order, std::size_t replicate) {
  FitConfig c;
  c.rank = a.rank;
  c.iterations = a.iters;
  c.burnin = a.burnin;
  c.thin = a.thin;
  c.sigma2 = a.sigma2;
  c.seed = a.seed;
  c.stream = stream_id(static_cast<std::uint32_t>(replicate), 0, kStreamFit);
  c.gamma_prior_precision = a.gamma_precision;
  c.init_scale = a.init_scale;
  c.random_scan = a.random_scan;
  c.keep_margins = a.keep_margins;
  if (a.alpha || a.a_tau || a.b_tau || a.a_lambda || a.b_lambda) {
    MdgdpHyper h = MdgdpHyper::defaults(a.rank, order);
    if (a.alpha) h.alpha = *a.alpha;
    if (a.a_tau) h.a_tau = *a.a_tau;
    if (a.b_tau) h.b_tau = *a.b_tau;
    if (a.a_lambda) h.a_lambda = *a.a_lambda;
    if (a.b_lambda) h.b_lambda = *a.b_lambda;
    c.hyper = h;
  }
  if (!a.init.empty()) c.initial_factors = read_tsrm(a.init);
  c.validate();
  return c;
}

int run_fit(const FitArgs& a) {
  const Clock clock;
  const Model model = parse_model(a.model);
  const fs::path root(a.out);
  std::vector<std::string> hashes(a.replicates);
  json resolved;
  std::mutex mutex;
  parallel_for(a.replicates, a.threads, [&](std::size_t k) {
    const fs::path data_dir = resolve_dataset(replicate_dir(a.data, a.replicates, k), "train");
    const Dataset train = read_dataset(data_dir);
    const FitConfig config = make_fit_config(a, train.dims.size(), k);
    const ChainOutput chain = fit_model(model, train, config);
    const fs::path dir = replicate_dir(root, a.replicates, k);
    write_chain(dir, chain);
    const DenseTensor mean = chain.posterior_mean_b();
    write_tsr1(dir / "posterior_mean.tsr", mean);
    if (mean.order() <= 2) write_pgm(dir / "posterior_mean.pgm", mean);
    hashes[k] = dataset_hash(data_dir);
    if (k == 0) {
      const std::lock_guard<std::mutex> lock(mutex);
      resolved = to_json(chain.config);
    }
  });

  RunManifest m;
  m.command = "fit";
  m.config = {{"model", a.model}, {"replicates", a.replicates}, {"data", a.data}};
  m.config["fit"] = resolved;
  m.seed = a.seed;
  std::string joined;
  for (const auto& h : hashes) joined += h + "\n";
  m.dataset_hash = a.replicates == 1 ? hashes.front() : sha256_hex(joined);
  m.elapsed_seconds = clock.seconds();
  m.files = list_files(root);
  m.write(root / "manifest.json");
  std::cout << "fitted " << a.replicates << " chain(s) in " << m.elapsed_seconds << " s\n";
  return 0;
}

// ---- predict ----------------------------------------------------------------

struct PredictArgs {
  std::string chain;
  std::string data;
  std::string out;
};

int run_predict(const PredictArgs& a) {
  const Clock clock;
  const ChainOutput chain = read_chain(a.chain);
  const fs::path data_dir = resolve_dataset(a.data, "test");
  const Dataset data = read_dataset(data_dir).with_convention(model_labels(chain.model));
  const Eigen::VectorXd score = predict_scores(chain, data);
  const Eigen::VectorXd label = predict_labels(chain, data);
  CsvWriter csv({"index", chain.model == Model::BtSvm ? "mean_f" : "probability", "label"});
  for (Eigen::Index i = 0; i < score.size(); ++i) {
    csv.add_row({std::to_string(i), CsvWriter::field(score[i]), CsvWriter::field(label[i])});
  }
  write_file_bytes(a.out, csv.str());

  RunManifest m;
  m.command = "predict";
  m.config = {{"chain", a.chain}, {"data", a.data}};
  m.seed = chain.config.seed;
  m.dataset_hash = dataset_hash(data_dir);
  m.elapsed_seconds = clock.seconds();
  m.files = {fs::path(a.out)};
  m.write(a.out + ".manifest.json");
  return 0;
}

// ---- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
  std::string chain;
  std::string data;
  std::string truth;
  std::size_t replicates = 1;
  std::string out;
};

int run_evaluate(const EvaluateArgs& a) {
  const Clock clock;
  std::vector<std::string> header{"replicate", "model"};
  for (const auto& h : evaluation_header()) header.push_back(h);
  CsvWriter csv(header);
  std::vector<std::vector<std::optional<double>>> rows;
  std::string model_name;
  std::string joined;
  for (std::size_t k = 0; k < a.replicates; ++k) {
    const ChainOutput chain = read_chain(replicate_dir(a.chain, a.replicates, k));
    const fs::path data_root = replicate_dir(a.data, a.replicates, k);
    const fs::path data_dir = resolve_dataset(data_root, "test");
    const Dataset test = read_dataset(data_dir);
    const fs::path truth_dir =
        resolve_truth(a.truth.empty() ? data_root : replicate_dir(a.truth, a.replicates, k));
    const GroundTruth truth = read_truth(truth_dir);
    const EvaluationRow row = evaluate(chain, test, truth.B);
    rows.push_back(evaluation_values(row));
    model_name = to_string(chain.model);
    std::vector<std::string> fields{std::to_string(k), model_name};
    for (const auto& v : rows.back()) fields.push_back(CsvWriter::field(v));
    csv.add_row(fields);
    joined += dataset_hash(data_dir) + "\n";
  }
  if (a.replicates > 1) {
    std::vector<std::string> fields{"mean", model_name};
    for (const auto& v : column_means(rows)) fields.push_back(CsvWriter::field(v));
    csv.add_row(fields);
  }
  write_file_bytes(a.out, csv.str());
  std::cout << csv.str();

  RunManifest m;
  m.command = "evaluate";
  m.config = {{"chain", a.chain}, {"data", a.data}, {"truth", a.truth}, {"replicates", a.replicates}};
  m.dataset_hash = sha256_hex(joined);
  m.elapsed_seconds = clock.seconds();
  m.files = {fs::path(a.out)};
  m.write(a.out + ".manifest.json");
  return 0;
}

// ---- rank-select ------------------------------------------------------------

struct RankArgs {
  FitArgs fit;
  std::string ranks = "2,3,4,5";
};

int run_rank_select(const RankArgs& a) {
  const Clock clock;
  const Model model = parse_model(a.fit.model);
  std::vector<std::size_t> ranks;
  for (const auto& r : split_list(a.ranks)) {
    const double v = parse_value(r);
    if (!(v >= 1.0) || v != std::floor(v)) throw UsageError("bad rank '" + r + "'");
    ranks.push_back(static_cast<std::size_t>(v));
  }
  std::vector<RankSelection> results(a.fit.replicates);
  std::vector<std::string> hashes(a.fit.replicates);
  parallel_for(a.fit.replicates, a.fit.threads, [&](std::size_t k) {
    const fs::path data_dir =
        resolve_dataset(replicate_dir(a.fit.data, a.fit.replicates, k), "train");
    const Dataset train = read_dataset(data_dir);
    const FitConfig base = make_fit_config(a.fit, train.dims.size(), k);
    results[k] = select_rank(model, train, base, ranks);
    hashes[k] = dataset_hash(data_dir);
  });

  CsvWriter csv({"replicate", "rank", "DIC", "pD", "loglik_at_mean", "mean_loglik", "chosen"});
  std::string joined;
  for (std::size_t k = 0; k < results.size(); ++k) {
    for (const auto& s : results[k].scores) {
      csv.add_row({std::to_string(k), std::to_string(s.rank), CsvWriter::field(s.dic.dic),
                   CsvWriter::field(s.dic.effective_parameters),
                   CsvWriter::field(s.dic.loglik_at_mean), CsvWriter::field(s.dic.mean_loglik),
                   s.rank == results[k].chosen ? "1" : "0"});
    }
    std::cout << "replicate " << k << ": chosen rank " << results[k].chosen << "\n";
    joined += hashes[k] + "\n";
  }
  write_file_bytes(a.fit.out, csv.str());

  RunManifest m;
  m.command = "rank-select";
  m.config = {{"model", a.fit.model}, {"ranks", ranks},          {"iters", a.fit.iters},
              {"burnin", a.fit.burnin}, {"sigma2", a.fit.sigma2}, {"seed", a.fit.seed},
              {"replicates", a.fit.replicates}};
  m.seed = a.fit.seed;
  m.dataset_hash = sha256_hex(joined);
  m.elapsed_seconds = clock.seconds();
  m.files = {fs::path(a.fit.out)};
  m.write(a.fit.out + ".manifest.json");
  return 0;
}

// ---- sweep ------------------------------------------------------------------

struct SweepArgs {
  FitArgs fit;
  std::string param = "alpha";
  std::string values;
  std::string truth;
};

int run_sweep(const SweepArgs& a) {
  const Clock clock;
  const Model model = parse_model(a.fit.model);
  const SweepParam param = parse_sweep_param(a.param);
  std::vector<std::pair<std::string, double>> values;
  for (const auto& v : split_list(a.values)) values.emplace_back(v, parse_value(v));

  const std::size_t reps = a.fit.replicates;
  const std::size_t jobs = values.size() * reps;
  std::vector<double> rmse(jobs);
  parallel_for(jobs, a.fit.threads, [&](std::size_t job) {
    const std::size_t v = job / reps, k = job % reps;
    const fs::path root = replicate_dir(a.fit.data, reps, k);
    const Dataset train = read_dataset(resolve_dataset(root, "train"));
    const GroundTruth truth =
        read_truth(resolve_truth(a.truth.empty() ? root : replicate_dir(a.truth, reps, k)));
    FitConfig config = make_fit_config(a.fit, train.dims.size(), k);
    config.hyper = swept_hyper(config.rank, train.dims.size(), param, values[v].second);
    const ChainOutput chain = fit_model(model, train, config);
    rmse[job] = estimation_metrics(chain.posterior_mean_b(), truth.B).rmse;
  });

  CsvWriter csv({"param", "value", "replicate", "RMSE"});
  for (std::size_t v = 0; v < values.size(); ++v) {
    double total = 0.0;
    for (std::size_t k = 0; k < reps; ++k) {
      csv.add_row({a.param, values[v].first, std::to_string(k),
                   CsvWriter::field(rmse[v * reps + k])});
      total += rmse[v * reps + k];
    }
    csv.add_row({a.param, values[v].first, "mean", CsvWriter::field(total / static_cast<double>(reps))});
  }
  write_file_bytes(a.fit.out, csv.str());
  std::cout << csv.str();

  RunManifest m;
  m.command = "sweep";
  m.config = {{"model", a.fit.model}, {"param", a.param},   {"values", a.values},
              {"rank", a.fit.rank},   {"iters", a.fit.iters}, {"burnin", a.fit.burnin},
              {"seed", a.fit.seed},   {"replicates", reps}};
  m.seed = a.fit.seed;
  m.elapsed_seconds = clock.seconds();
  m.files = {fs::path(a.fit.out)};
  m.write(a.fit.out + ".manifest.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian tensor classifiers (BT-SVM, BT-LR)"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "generate replicate datasets for a scenario");
  sim_cmd->add_option("--scenario", sim.scenario, "scenario 1-4")->capture_default_str();
  sim_cmd->add_option("--loss", sim.loss, "svm or logistic")->capture_default_str();
  sim_cmd->add_option("--n", sim.n, "samples per replicate")->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
  sim_cmd->add_option("--dims", sim.dims, "tensor dims, e.g. 48,48")->delimiter(',')
      ->capture_default_str();
  sim_cmd->add_option("--true-rank", sim.true_rank, "rank of scenario 1")->capture_default_str();
  sim_cmd->add_option("--extra-covariates", sim.extra_covariates, "scalar covariates besides the intercept")
      ->capture_default_str();
  sim_cmd->add_option("--train-fraction", sim.train_fraction, "training share")->capture_default_str();
  sim_cmd->add_option("--replicates", sim.replicates, "number of replicates")->capture_default_str();
  sim_cmd->add_option("--threads", sim.threads, "worker threads")->capture_default_str();
  sim_cmd->add_option("--out", sim.out, "output directory")->required();
  sim_cmd->add_option("--config", "flat key=value config file");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "run the Gibbs sampler");
  add_fit_options(fit_cmd, fit);
  fit_cmd->add_option("--replicates", fit.replicates, "number of replicates")->capture_default_str();
  fit_cmd->add_option("--threads", fit.threads, "worker threads")->capture_default_str();
  fit_cmd->add_option("--data", fit.data, "dataset or simulation directory")->required();
  fit_cmd->add_option("--out", fit.out, "chain output directory")->required();
  fit_cmd->add_option("--config", "flat key=value config file");

  PredictArgs pred;
  auto* pred_cmd = app.add_subcommand("predict", "posterior predictions for a dataset");
  pred_cmd->add_option("--chain", pred.chain, "chain directory")->required();
  pred_cmd->add_option("--data", pred.data, "dataset or simulation directory")->required();
  pred_cmd->add_option("--out", pred.out, "output CSV")->required();
  pred_cmd->add_option("--config", "flat key=value config file");

  EvaluateArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "estimation, classification and selection metrics");
  eval_cmd->add_option("--chain", eval.chain, "chain directory")->required();
  eval_cmd->add_option("--data", eval.data, "test dataset or simulation directory")->required();
  eval_cmd->add_option("--truth", eval.truth, "ground-truth directory (default: beside the data)");
  eval_cmd->add_option("--replicates", eval.replicates, "number of replicates")->capture_default_str();
  eval_cmd->add_option("--out", eval.out, "output CSV")->required();
  eval_cmd->add_option("--config", "flat key=value config file");

  RankArgs rank;
  auto* rank_cmd = app.add_subcommand("rank-select", "choose the PARAFAC rank by DIC");
  add_fit_options(rank_cmd, rank.fit);
  rank_cmd->add_option("--ranks", rank.ranks, "candidate ranks")->capture_default_str();
  rank_cmd->add_option("--replicates", rank.fit.replicates, "number of replicates")->capture_default_str();
  rank_cmd->add_option("--threads", rank.fit.threads, "worker threads")->capture_default_str();
  rank_cmd->add_option("--data", rank.fit.data, "dataset or simulation directory")->required();
  rank_cmd->add_option("--out", rank.fit.out, "output CSV")->required();
  rank_cmd->add_option("--config", "flat key=value config file");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "prior hyperparameter sensitivity (RMSE per value)");
  add_fit_options(sweep_cmd, sweep.fit);
  sweep_cmd->add_option("--param", sweep.param, "alpha, a_lambda, a_tau, b_lambda or b_tau")
      ->capture_default_str();
  sweep_cmd->add_option("--values", sweep.values, "comma-separated values, e.g. 1/9,1/6,1/3")
      ->required();
  sweep_cmd->add_option("--truth", sweep.truth, "ground-truth directory (default: beside the data)");
  sweep_cmd->add_option("--replicates", sweep.fit.replicates, "number of replicates")->capture_default_str();
  sweep_cmd->add_option("--threads", sweep.fit.threads, "worker threads")->capture_default_str();
  sweep_cmd->add_option("--data", sweep.fit.data, "dataset or simulation directory")->required();
  sweep_cmd->add_option("--out", sweep.fit.out, "output CSV")->required();
  sweep_cmd->add_option("--config", "flat key=value config file");

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = expand_config(std::move(args));
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << one_line(e.what()) << "\n";
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "error: usage: " << one_line(e.what()) << "\n";
    return 1;
  }

  try {
    if (*sim_cmd) return run_simulate(sim);
    if (*fit_cmd) return run_fit(fit);
    if (*pred_cmd) return run_predict(pred);
    if (*eval_cmd) return run_evaluate(eval);
    if (*rank_cmd) return run_rank_select(rank);
    if (*sweep_cmd) return run_sweep(sweep);
  } catch (const UsageError& e) {
    std::cerr << "error: usage: " << one_line(e.what()) << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: config: " << one_line(e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: runtime: " << one_line(e.what()) << "\n";
    return 2;
  }
  return 1;
}
