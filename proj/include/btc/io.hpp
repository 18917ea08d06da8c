#ifndef BTC_IO_HPP
#define BTC_IO_HPP

// Directory layouts used by the CLI.
//
// dataset dir:  X.tsr (n x p_1 x ... x p_D), Z.tsr (n x q), y.tsr (n), meta.json
// truth dir:    B.tsr, gamma.tsr, B.pgm (2-D only)
// chain dir:    b_draws.tsr (S x p_1 x ... x p_D), gamma.tsr (S x q), tau.tsr (S),
//               phi.tsr (S x R), loglik.tsr (iterations), final.tsrm, chain.json,
//               optional margins.tsr (S x R x sum p_j)

#include <openssl/evp.h>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "btc/chain.hpp"
#include "btc/dataset.hpp"
#include "btc/error.hpp"
#include "btc/formats.hpp"
#include "btc/prior.hpp"
#include "btc/tensor.hpp"

namespace btc {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int k = 0; k < length; ++k) {
    out.push_back(kHex[digest[k] >> 4]);
    out.push_back(kHex[digest[k] & 0xf]);
  }
  return out;
}

inline std::string sha256_file(const fs::path& path) { return sha256_hex(read_file_bytes(path)); }

namespace detail {

inline DenseTensor matrix_tensor(const RowMatrix& m, Dims trailing) {
  Dims dims{static_cast<std::size_t>(m.rows())};
  dims.insert(dims.end(), trailing.begin(), trailing.end());
  return DenseTensor(std::move(dims), std::vector<double>(m.data(), m.data() + m.size()));
}

inline RowMatrix tensor_matrix(const DenseTensor& t, const std::string& what) {
  if (t.order() < 1) throw FormatError(what + ": empty tensor");
  const auto rows = static_cast<Eigen::Index>(t.dims()[0]);
  const auto cols = static_cast<Eigen::Index>(t.size() / t.dims()[0]);
  RowMatrix m(rows, cols);
  std::copy(t.values().begin(), t.values().end(), m.data());
  return m;
}

inline json read_json(const fs::path& path) {
  const std::string text = read_file_bytes(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline void write_json(const fs::path& path, const json& j) {
  write_file_bytes(path, j.dump(2) + "\n");
}

template <class T>
T json_get(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw FormatError(where + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(where + ": bad value for '" + key + "': " + e.what());
  }
}

}  // namespace detail

// ---- datasets ---------------------------------------------------------------

inline void write_dataset(const fs::path& dir, const Dataset& data, json meta = json::object()) {
  data.validate();
  fs::create_directories(dir);
  write_tsr1(dir / "X.tsr", detail::matrix_tensor(data.design, data.dims));
  write_tsr1(dir / "Z.tsr", detail::matrix_tensor(data.covariates, {data.covariate_count()}));
  write_tsr1(dir / "y.tsr", Dims{data.size()},
             std::span<const double>(data.labels.data(), data.size()));
  meta["convention"] = to_string(data.convention);
  meta["n"] = data.size();
  meta["dims"] = data.dims;
  detail::write_json(dir / "meta.json", meta);
}

inline Dataset read_dataset(const fs::path& dir) {
  const json meta = detail::read_json(dir / "meta.json");
  Dataset data;
  data.convention = parse_label_convention(
      detail::json_get<std::string>(meta, "convention", (dir / "meta.json").string()));
  const DenseTensor x = read_tsr1(dir / "X.tsr");
  if (x.order() < 2) throw FormatError((dir / "X.tsr").string() + ": expected n x dims tensor");
  data.dims.assign(x.dims().begin() + 1, x.dims().end());
  data.design = detail::tensor_matrix(x, "X.tsr");
  data.covariates = detail::tensor_matrix(read_tsr1(dir / "Z.tsr"), "Z.tsr");
  const DenseTensor y = read_tsr1(dir / "y.tsr");
  data.labels = Eigen::Map<const Eigen::VectorXd>(y.values().data(),
                                                  static_cast<Eigen::Index>(y.size()));
  data.validate();
  return data;
}

inline void write_truth(const fs::path& dir, const GroundTruth& truth) {
  fs::create_directories(dir);
  write_tsr1(dir / "B.tsr", truth.B);
  write_tsr1(dir / "gamma.tsr", Dims{truth.gamma.size()}, truth.gamma);
  if (truth.B.order() <= 2) write_pgm(dir / "B.pgm", truth.B);
}

inline GroundTruth read_truth(const fs::path& dir) {
  GroundTruth truth{read_tsr1(dir / "B.tsr"), {}};
  const DenseTensor g = read_tsr1(dir / "gamma.tsr");
  truth.gamma.assign(g.values().begin(), g.values().end());
  return truth;
}

// ---- configuration ----------------------------------------------------------

inline json to_json(const MdgdpHyper& h) {
  return {{"a_tau", h.a_tau}, {"b_tau", h.b_tau}, {"alpha", h.alpha},
          {"a_lambda", h.a_lambda}, {"b_lambda", h.b_lambda}};
}

inline MdgdpHyper hyper_from_json(const json& j, const std::string& where) {
  MdgdpHyper h;
  h.a_tau = detail::json_get<double>(j, "a_tau", where);
  h.b_tau = detail::json_get<double>(j, "b_tau", where);
  h.alpha = detail::json_get<double>(j, "alpha", where);
  h.a_lambda = detail::json_get<double>(j, "a_lambda", where);
  h.b_lambda = detail::json_get<double>(j, "b_lambda", where);
  return h;
}

inline json to_json(const FitConfig& c) {
  json j = {{"rank", c.rank},
            {"iterations", c.iterations},
            {"burnin", c.burnin},
            {"thin", c.thin},
            {"seed", c.seed},
            {"stream", c.stream},
            {"sigma2", c.sigma2},
            {"gamma_prior_precision", c.gamma_prior_precision},
            {"init_scale", c.init_scale},
            {"warm_start", c.initial_factors.has_value()},
            {"random_scan", c.random_scan},
            {"keep_margins", c.keep_margins}};
  j["hyper"] = c.hyper ? to_json(*c.hyper) : json(nullptr);
  return j;
}

inline FitConfig fit_config_from_json(const json& j, const std::string& where) {
  FitConfig c;
  c.rank = detail::json_get<std::size_t>(j, "rank", where);
  c.iterations = detail::json_get<std::size_t>(j, "iterations", where);
  c.burnin = detail::json_get<std::size_t>(j, "burnin", where);
  c.thin = detail::json_get<std::size_t>(j, "thin", where);
  c.seed = detail::json_get<std::uint64_t>(j, "seed", where);
  c.stream = detail::json_get<std::uint64_t>(j, "stream", where);
  c.sigma2 = detail::json_get<double>(j, "sigma2", where);
  c.gamma_prior_precision = detail::json_get<double>(j, "gamma_prior_precision", where);
  c.init_scale = detail::json_get<double>(j, "init_scale", where);
  c.random_scan = detail::json_get<bool>(j, "random_scan", where);
  c.keep_margins = detail::json_get<bool>(j, "keep_margins", where);
  if (j.contains("hyper") && !j.at("hyper").is_null()) c.hyper = hyper_from_json(j.at("hyper"), where);
  return c;
}

// ---- chains -----------------------------------------------------------------

inline void write_chain(const fs::path& dir, const ChainOutput& chain) {
  fs::create_directories(dir);
  const std::size_t s = chain.draw_count();
  write_tsr1(dir / "b_draws.tsr", detail::matrix_tensor(chain.b_draws, chain.dims));
  write_tsr1(dir / "gamma.tsr", detail::matrix_tensor(chain.gamma_draws, {chain.covariate_count}));
  write_tsr1(dir / "tau.tsr", Dims{s}, chain.tau_draws);
  write_tsr1(dir / "phi.tsr", detail::matrix_tensor(chain.phi_draws, {chain.config.rank}));
  write_tsr1(dir / "loglik.tsr", Dims{chain.loglik.size()}, chain.loglik);
  if (chain.final_factors.rank() > 0) write_tsrm(dir / "final.tsrm", chain.final_factors);
  if (!chain.margin_draws.empty()) {
    std::size_t total = 0;
    for (auto p : chain.dims) total += p;
    std::vector<double> flat;
    flat.reserve(chain.margin_draws.size() * chain.config.rank * total);
    for (const auto& f : chain.margin_draws) {
      for (std::size_t r = 0; r < f.rank(); ++r) {
        for (std::size_t j = 0; j < f.order(); ++j) {
          const auto m = f.margin(j, r);
          flat.insert(flat.end(), m.begin(), m.end());
        }
      }
    }
    write_tsr1(dir / "margins.tsr", Dims{chain.margin_draws.size(), chain.config.rank, total}, flat);
  }
  json meta = {{"model", to_string(chain.model)},
               {"dims", chain.dims},
               {"covariate_count", chain.covariate_count},
               {"draws", s},
               {"phi_proposals_rejected", chain.phi_proposals_rejected},
               {"kept_iterations", chain.kept_iterations}};
  meta["config"] = to_json(chain.config);
  detail::write_json(dir / "chain.json", meta);
}

inline ChainOutput read_chain(const fs::path& dir) {
  const std::string where = (dir / "chain.json").string();
  const json meta = detail::read_json(dir / "chain.json");
  ChainOutput chain;
  chain.model = parse_model(detail::json_get<std::string>(meta, "model", where));
  chain.dims = detail::json_get<Dims>(meta, "dims", where);
  chain.covariate_count = detail::json_get<std::size_t>(meta, "covariate_count", where);
  chain.phi_proposals_rejected = detail::json_get<std::size_t>(meta, "phi_proposals_rejected", where);
  chain.kept_iterations = detail::json_get<std::vector<std::size_t>>(meta, "kept_iterations", where);
  chain.config = fit_config_from_json(meta.at("config"), where);

  chain.b_draws = detail::tensor_matrix(read_tsr1(dir / "b_draws.tsr"), "b_draws.tsr");
  chain.gamma_draws = detail::tensor_matrix(read_tsr1(dir / "gamma.tsr"), "gamma.tsr");
  chain.phi_draws = detail::tensor_matrix(read_tsr1(dir / "phi.tsr"), "phi.tsr");
  const DenseTensor tau = read_tsr1(dir / "tau.tsr");
  chain.tau_draws.assign(tau.values().begin(), tau.values().end());
  const DenseTensor ll = read_tsr1(dir / "loglik.tsr");
  chain.loglik.assign(ll.values().begin(), ll.values().end());
  if (fs::exists(dir / "final.tsrm")) chain.final_factors = read_tsrm(dir / "final.tsrm");

  const auto s = static_cast<std::size_t>(chain.b_draws.rows());
  if (static_cast<std::size_t>(chain.b_draws.cols()) != cell_count(chain.dims) ||
      chain.tau_draws.size() != s || static_cast<std::size_t>(chain.gamma_draws.rows()) != s ||
      static_cast<std::size_t>(chain.phi_draws.rows()) != s || chain.kept_iterations.size() != s) {
    throw FormatError(dir.string() + ": chain files disagree on the number of draws");
  }
  for (auto it : chain.kept_iterations) {
    if (it >= chain.loglik.size()) throw FormatError(where + ": kept iteration beyond loglik trace");
  }
  return chain;
}

// ---- CSV --------------------------------------------------------------------

/// Minimal RFC-4180 writer: fields containing a comma, quote or newline are quoted.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : width_(header.size()) { add_row(header); }

  void add_row(const std::vector<std::string>& fields) {
    if (fields.size() != width_) throw StructuralError("CSV row width does not match header");
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (k) text_ += ',';
      text_ += escape(fields[k]);
    }
    text_ += "\r\n";
  }

  const std::string& str() const { return text_; }

  static std::string field(double v) { return format_double(v); }
  static std::string field(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

 private:
  static std::string escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  }

  std::size_t width_;
  std::string text_;
};

// ---- manifests --------------------------------------------------------------

#ifndef BTC_BUILD_ID
#define BTC_BUILD_ID "unknown"
#endif

/// Record of one CLI run: resolved configuration and hashes of every artifact.
struct RunManifest {
  std::string command;
  json config = json::object();
  std::uint64_t seed = 0;
  std::string dataset_hash;
  std::string build_id = BTC_BUILD_ID;
  double elapsed_seconds = 0.0;
  std::vector<fs::path> files;

  /// Hash the listed files and write the manifest to `path`; listed paths
  /// are relative to its directory.
  void write(const fs::path& path) const {
    const fs::path root = path.has_parent_path() ? path.parent_path() : fs::path(".");
    json j = {{"command", command},
              {"build_id", build_id},
              {"seed", seed},
              {"dataset_hash", dataset_hash},
              {"elapsed_seconds", elapsed_seconds}};
    j["config"] = config;
    json listed = json::array();
    for (const auto& f : files) {
      const std::string bytes = read_file_bytes(f);
      listed.push_back({{"path", fs::relative(f, root).generic_string()},
                        {"bytes", bytes.size()},
                        {"sha256", sha256_hex(bytes)}});
    }
    j["files"] = listed;
    detail::write_json(path, j);
  }
};

/// Hash of a dataset directory: SHA-256 over the hashes of its files in name order.
inline std::string dataset_hash(const fs::path& dir) {
  std::string joined;
  for (const char* name : {"X.tsr", "Z.tsr", "y.tsr", "meta.json"}) {
    joined += name;
    joined += ':';
    joined += sha256_file(dir / name);
    joined += '\n';
  }
  return sha256_hex(joined);
}

/// Regular files under `dir`, recursively, sorted by path.
inline std::vector<fs::path> list_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() != "manifest.json") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace btc

#endif  // BTC_IO_HPP
