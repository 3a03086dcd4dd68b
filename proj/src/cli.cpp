#include "wicm/cli.hpp"

#include "wicm/bootstrap.hpp"
#include "wicm/csv.hpp"
#include "wicm/model.hpp"
#include "wicm/weights.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

namespace wicm::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::RankDeficient:
    case ErrorKind::NoConvergence:
    case ErrorKind::SingularGram:
    case ErrorKind::SingularSigma:
      return kNumericalError;
    case ErrorKind::ConfigInvalid:
      return kConfigError;
    case ErrorKind::InvalidArgument:
    case ErrorKind::ZeroVariance:
    case ErrorKind::DegenerateResponse:
    case ErrorKind::MissingColumn:
    case ErrorKind::NonNumericCell:
    case ErrorKind::EmptyFile:
      return kInputError;
  }
  return kInputError;
}

std::string file_sha256(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::EmptyFile, "cannot open " + path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::vector<char> buffer(1 << 16);
  while (in) {
    in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &length);
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::EmptyFile, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << text;
}

json number_or_null(double value) { return std::isfinite(value) ? json(value) : json(nullptr); }

// ---------------------------------------------------------------------------
// Study config

[[noreturn]] void config_error(const std::string& field, const std::string& message) {
  throw Error(ErrorKind::ConfigInvalid, field + ": " + message);
}

template <class T>
T config_number(const json& node, const std::string& field) {
  if (!node.is_number()) config_error(field, "expected a number");
  if constexpr (std::is_integral_v<T>) {
    if (!node.is_number_integer() && !node.is_number_unsigned()) config_error(field, "expected an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (node.is_number_integer() && node.get<std::int64_t>() < 0) config_error(field, "must be non-negative");
    }
  }
  return node.get<T>();
}

template <class T>
std::vector<T> config_list(const json& node, const std::string& field) {
  std::vector<T> values;
  if (node.is_array()) {
    if (node.empty()) config_error(field, "list must not be empty");
    for (std::size_t i = 0; i < node.size(); ++i) {
      values.push_back(config_number<T>(node[i], field + "[" + std::to_string(i) + "]"));
    }
  } else {
    values.push_back(config_number<T>(node, field));
  }
  return values;
}

std::vector<std::string> config_strings(const json& node, const std::string& field) {
  std::vector<std::string> values;
  auto one = [&](const json& item, const std::string& name) {
    if (!item.is_string()) config_error(name, "expected a string");
    values.push_back(item.get<std::string>());
  };
  if (node.is_array()) {
    if (node.empty()) config_error(field, "list must not be empty");
    for (std::size_t i = 0; i < node.size(); ++i) one(node[i], field + "[" + std::to_string(i) + "]");
  } else {
    one(node, field);
  }
  return values;
}

void reject_unknown_keys(const json& node, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& item : node.items()) {
    bool found = false;
    for (const char* key : known) found = found || item.key() == key;
    if (!found) config_error(where + item.key(), "unknown key");
  }
}

}  // namespace

sim::SimStudyConfig parse_study_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) config_error("(root)", "expected an object");
  reject_unknown_keys(root, {"reps", "alpha", "master_seed", "workers", "bootstrap", "grid", "description"}, "");

  sim::SimStudyConfig cfg;
  if (root.contains("reps")) cfg.reps = config_number<Index>(root["reps"], "reps");
  if (root.contains("alpha")) cfg.alpha = config_number<double>(root["alpha"], "alpha");
  if (root.contains("master_seed")) cfg.master_seed = config_number<std::uint64_t>(root["master_seed"], "master_seed");
  if (root.contains("workers")) cfg.workers = config_number<std::size_t>(root["workers"], "workers");
  if (root.contains("bootstrap")) {
    const json& b = root["bootstrap"];
    if (!b.is_object()) config_error("bootstrap", "expected an object");
    reject_unknown_keys(b, {"B", "v_n"}, "bootstrap.");
    if (b.contains("B")) cfg.bootstrap.B = config_number<Index>(b["B"], "bootstrap.B");
    if (b.contains("v_n")) cfg.bootstrap.v_n = config_number<double>(b["v_n"], "bootstrap.v_n");
  }
  if (cfg.reps < 1) config_error("reps", "must be >= 1");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) config_error("alpha", "must lie in (0, 1)");
  if (cfg.bootstrap.B < 1) config_error("bootstrap.B", "must be >= 1");
  if (!(cfg.bootstrap.v_n >= 0.0)) config_error("bootstrap.v_n", "must be >= 0");

  if (!root.contains("grid")) config_error("grid", "missing");
  const json& grid = root["grid"];
  if (!grid.is_array() || grid.empty()) config_error("grid", "expected a non-empty list");
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const std::string where = "grid[" + std::to_string(g) + "]";
    const json& block = grid[g];
    if (!block.is_object()) config_error(where, "expected an object");
    reject_unknown_keys(block, {"family", "a", "n", "p", "columns", "sigma", "methods"}, where + ".");

    if (!block.contains("family")) config_error(where + ".family", "missing");
    if (!block["family"].is_string()) config_error(where + ".family", "expected a string");
    const auto family = sim::parse_family(block["family"].get<std::string>());
    if (!family || *family == sim::Family::custom) {
      config_error(where + ".family", "unknown family '" + block["family"].get<std::string>() +
                                          "' (expected H1, H2, H3, H4 or linear_null)");
    }

    sim::CovarianceKind sigma = sim::CovarianceKind::identity;
    if (block.contains("sigma")) {
      if (!block["sigma"].is_string()) config_error(where + ".sigma", "expected a string");
      const auto parsed = sim::parse_covariance(block["sigma"].get<std::string>());
      if (!parsed) config_error(where + ".sigma", "expected identity or geometric");
      sigma = *parsed;
    }

    const std::vector<double> a_values =
        block.contains("a") ? config_list<double>(block["a"], where + ".a") : std::vector<double>{0.0};

    std::vector<std::pair<Index, Index>> columns;
    if (block.contains("columns")) {
      if (block.contains("n") || block.contains("p")) config_error(where + ".columns", "use either columns or n/p");
      const json& cols = block["columns"];
      if (!cols.is_array() || cols.empty()) config_error(where + ".columns", "expected a non-empty list of [n, p]");
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const std::string name = where + ".columns[" + std::to_string(c) + "]";
        if (!cols[c].is_array() || cols[c].size() != 2) config_error(name, "expected [n, p]");
        columns.emplace_back(config_number<Index>(cols[c][0], name + "[0]"),
                             config_number<Index>(cols[c][1], name + "[1]"));
      }
    } else {
      if (!block.contains("n")) config_error(where + ".n", "missing");
      if (!block.contains("p")) config_error(where + ".p", "missing");
      for (Index n : config_list<Index>(block["n"], where + ".n")) {
        for (Index p : config_list<Index>(block["p"], where + ".p")) columns.emplace_back(n, p);
      }
    }

    if (!block.contains("methods")) config_error(where + ".methods", "missing");
    std::vector<sim::Method> methods;
    for (const auto& text : config_strings(block["methods"], where + ".methods")) {
      const auto m = sim::parse_method(text);
      if (!m) config_error(where + ".methods", "unknown method '" + text + "' (expected WICM1, WICM2 or ICM)");
      if (*m == sim::Method::WICM1 && *family == sim::Family::linear_null) {
        config_error(where + ".methods", "WICM1 needs a family with a directional class");
      }
      methods.push_back(*m);
    }

    for (sim::Method m : methods) {
      for (double a : a_values) {
        for (const auto& [n, p] : columns) {
          sim::StudyCell cell;
          cell.dgp.family = *family;
          cell.dgp.a = a;
          cell.dgp.n = n;
          cell.dgp.p = p;
          cell.dgp.sigma = sigma;
          cell.method = m;
          try {
            cell.dgp.validate();
          } catch (const Error& e) {
            config_error(where, std::string("cell n=") + std::to_string(n) + ", p=" + std::to_string(p) +
                                    " is invalid: " + e.what());
          }
          cfg.grid.push_back(std::move(cell));
        }
      }
    }
  }
  return cfg;
}

namespace {

// ---------------------------------------------------------------------------
// test subcommand

struct TestOptions {
  std::string data;
  std::string response;
  bool standardize = false;
  bool intercept = false;
  std::string weight = "nonparametric";
  std::string alt = "square";
  std::string index = "fitted";
  Index B = 500;
  double v_n = 0.2;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string out_dir;
};

using Shape = double (*)(double);

const std::map<std::string, Shape>& shapes() {
  static const std::map<std::string, Shape> table{
      {"square", [](double u) { return u * u; }},
      {"cube", [](double u) { return u * u * u; }},
      {"cos", [](double u) { return std::cos(std::numbers::pi * u); }},
      {"cos06", [](double u) { return std::cos(0.6 * std::numbers::pi * u); }},
      {"sin", [](double u) { return std::sin(std::numbers::pi * u); }},
      {"abs", [](double u) { return std::abs(u); }},
      {"exp", [](double u) { return std::exp(u); }},
  };
  return table;
}

VectorXd parse_index(const std::string& text, const FittedModel& fit, Index d) {
  VectorXd b;
  if (text == "fitted") {
    b = fit.beta_hat.tail(d);
  } else if (text == "equal") {
    b = VectorXd::Ones(d);
  } else if (text.rfind("first:", 0) == 0) {
    Index k = 0;
    try {
      k = std::stoll(text.substr(6));
    } catch (const std::exception&) {
      throw Error(ErrorKind::ConfigInvalid, "--index first:K needs an integer K");
    }
    if (k < 1 || k > d) throw Error(ErrorKind::ConfigInvalid, "--index first:K needs 1 <= K <= " + std::to_string(d));
    b = VectorXd::Zero(d);
    b.head(k).setOnes();
  } else {
    const auto cells = split_csv_line(text);
    if (static_cast<Index>(cells.size()) != d) {
      throw Error(ErrorKind::ConfigInvalid, "--index list needs " + std::to_string(d) + " entries");
    }
    b.resize(d);
    for (Index k = 0; k < d; ++k) {
      try {
        std::size_t used = 0;
        b(k) = std::stod(cells[static_cast<std::size_t>(k)], &used);
        if (used != cells[static_cast<std::size_t>(k)].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw Error(ErrorKind::ConfigInvalid, "--index entry " + std::to_string(k + 1) + " is not a number");
      }
    }
  }
  const double norm = b.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw Error(ErrorKind::ConfigInvalid, "--index direction is zero");
  return b / norm;
}

std::string boot_stats_csv(const TestOutcome& outcome) {
  std::string text = "replication,statistic\n";
  for (std::size_t j = 0; j < outcome.boot_stats.size(); ++j) {
    text += std::to_string(j + 1) + "," + format_number(outcome.boot_stats[j]) + "\n";
  }
  return text;
}

std::string residuals_csv(const FittedModel& fit, const WeightVector& w) {
  std::string text = "fitted,residual,weight\n";
  for (Index i = 0; i < fit.fitted.size(); ++i) {
    text += format_number(fit.fitted(i)) + "," + format_number(fit.residuals(i)) + "," +
            format_number(w.values(i)) + "\n";
  }
  return text;
}

json config_json(const TestOptions& o) {
  json c;
  c["data"] = o.data;
  c["response"] = o.response;
  c["standardize"] = o.standardize;
  c["intercept"] = o.intercept;
  c["weight"] = o.weight;
  if (o.weight == "directional") {
    c["alt"] = o.alt;
    c["index"] = o.index;
  }
  c["B"] = o.B;
  c["v_n"] = o.v_n;
  c["alpha"] = o.alpha;
  c["seed"] = o.seed;
  c["workers"] = o.workers;
  return c;
}

json manifest_json(const std::vector<std::string>& args, const std::string& command, const json& inputs,
                   std::uint64_t seed, const json& config, const std::vector<std::string>& outputs,
                   double runtime) {
  json m;
  m["tool"] = "wicm";
  m["version"] = kVersion;
  m["command"] = command;
  m["argv"] = json(std::vector<std::string>(args.begin() + 1, args.end()));
  m["working_directory"] = fs::current_path().string();
  m["inputs"] = inputs;
  m["seed"] = seed;
  m["config"] = config;
  m["outputs"] = outputs;
  m["runtime_seconds"] = runtime;
  return m;
}

int cmd_test(const TestOptions& o, const std::vector<std::string>& args, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  if (o.B < 1) throw Error(ErrorKind::ConfigInvalid, "--bootstrap must be >= 1");
  if (o.weight == "directional" && !shapes().contains(o.alt)) {
    std::string names;
    for (const auto& [name, fn] : shapes()) names += (names.empty() ? "" : ", ") + name;
    throw Error(ErrorKind::ConfigInvalid, "--alt must be one of " + names);
  }

  const NamedDataset named = ingest_csv(o.data, o.response);
  const Dataset data = o.standardize ? standardize(named.data) : named.data;
  const Index d = data.d();
  const ModelSpec spec = make_linear_model(d, o.intercept);
  const FittedModel fit = fit_least_squares(data, spec);

  WeightVector w;
  std::optional<Index> s_hat;
  std::string weight_label;
  if (o.weight == "directional") {
    const VectorXd b = parse_index(o.index, fit, d);
    const Shape shape = shapes().at(o.alt);
    const DirectionalAlternative alt =
        make_feature_alternative({[b, shape](const VectorXd& x) { return shape(b.dot(x)); }},
                                 "theta*" + o.alt + "(b'x), index " + o.index);
    w = directional_weight(data, fit, spec, alt);
    weight_label = alt.label;
  } else {
    Index s = 0;
    w = sdr_nonparametric_weight(data, fit, spec, &s);
    s_hat = s;
    weight_label = "CSE+MERE index powers 2,3,4";
  }

  BootstrapConfig boot;
  boot.B = o.B;
  boot.v_n = o.v_n;
  boot.alpha = o.alpha;
  boot.seed = o.seed;
  boot.workers = o.workers;
  boot.validate();
  const TestOutcome outcome = smooth_residual_bootstrap(data, spec, fit, w, boot);

  std::ostringstream report;
  report << "WICM specification test\n";
  report << "data            " << o.data << " (n=" << data.n() << ", d=" << d << ", response " << o.response
         << (o.standardize ? ", standardized" : "") << ")\n";
  report << "null model      " << spec.label << "\n";
  report << "weight          " << o.weight << ": " << weight_label << "\n";
  if (s_hat) report << "s_hat           " << *s_hat << "\n";
  report << "statistic       " << format_number(outcome.statistic) << "\n";
  report << "p-value         " << format_number(outcome.p_value) << "\n";
  report << "critical value  " << format_number(outcome.critical_value) << " (alpha " << format_number(o.alpha)
         << ")\n";
  report << "decision        " << (outcome.reject ? "reject" : "do not reject") << " the null model\n";
  report << "bootstrap       B=" << o.B << ", v_n=" << format_number(o.v_n) << ", seed=" << o.seed << "\n";
  out << report.str();

  if (!o.out_dir.empty()) {
    const fs::path dir(o.out_dir);
    fs::create_directories(dir);
    json result;
    result["statistic"] = number_or_null(outcome.statistic);
    result["p_value"] = outcome.p_value;
    result["critical_value"] = number_or_null(outcome.critical_value);
    result["reject"] = outcome.reject;
    result["alpha"] = o.alpha;
    result["n"] = data.n();
    result["d"] = d;
    result["null_model"] = spec.label;
    result["beta_hat"] = std::vector<double>(fit.beta_hat.data(), fit.beta_hat.data() + fit.beta_hat.size());
    result["weight"] = o.weight;
    result["weight_label"] = weight_label;
    result["s_hat"] = s_hat ? json(*s_hat) : json(nullptr);
    result["bootstrap"] = {{"B", o.B}, {"v_n", o.v_n}, {"seed", o.seed}};
    write_file(dir / "report.txt", report.str());
    write_file(dir / "result.json", result.dump(2) + "\n");
    write_file(dir / "boot_stats.csv", boot_stats_csv(outcome));
    write_file(dir / "residuals.csv", residuals_csv(fit, w));
    const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json inputs = json::array();
    inputs.push_back({{"path", o.data}, {"sha256", file_sha256(o.data)}});
    const json manifest = manifest_json(args, "test", inputs, o.seed, config_json(o),
                                        {"report.txt", "result.json", "boot_stats.csv", "residuals.csv"}, runtime);
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  }
  return kSuccess;
}

// ---------------------------------------------------------------------------
// simulate subcommand

struct SimulateOptions {
  std::string config;
  std::string out_dir;
  std::optional<Index> reps;
  std::optional<Index> B;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
};

json study_json(const sim::SimStudyConfig& cfg) {
  json c;
  c["reps"] = cfg.reps;
  c["alpha"] = cfg.alpha;
  c["master_seed"] = cfg.master_seed;
  c["workers"] = cfg.workers;
  c["bootstrap"] = {{"B", cfg.bootstrap.B}, {"v_n", cfg.bootstrap.v_n}};
  c["cells"] = cfg.grid.size();
  return c;
}

int cmd_simulate(const SimulateOptions& o, const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  sim::SimStudyConfig cfg = parse_study_config(read_file(o.config));
  if (o.reps) cfg.reps = *o.reps;
  if (o.B) cfg.bootstrap.B = *o.B;
  if (o.seed) cfg.master_seed = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  if (cfg.reps < 1) config_error("reps", "must be >= 1");
  if (cfg.bootstrap.B < 1) config_error("bootstrap.B", "must be >= 1");

  const sim::SimResult result = sim::run_study(cfg);
  const std::string flat = sim::emit_flat_csv(result);
  const std::string table = sim::emit_rate_table(result);
  out << table;

  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  write_file(dir / "results.csv", flat);
  write_file(dir / "table.txt", table);

  json cells = json::array();
  bool any_failed = false;
  for (const auto& row : result.rows) {
    json cell;
    cell["family"] = sim::to_string(row.family);
    cell["a"] = row.a;
    cell["n"] = row.n;
    cell["p"] = row.p;
    cell["sigma"] = sim::to_string(row.sigma);
    cell["method"] = sim::to_string(row.method);
    cell["alternative_class"] = row.alternative_label;
    cell["rejections"] = row.rejections;
    cell["runtime_seconds"] = row.runtime_seconds;
    if (!row.ok()) {
      cell["error"] = row.error;
      any_failed = true;
      err << "cell " << sim::to_string(row.family) << " a=" << format_number(row.a) << " n=" << row.n
          << " p=" << row.p << " " << sim::to_string(row.method) << " failed: " << row.error << "\n";
    }
    cells.push_back(std::move(cell));
  }
  json inputs = json::array();
  inputs.push_back({{"path", o.config}, {"sha256", file_sha256(o.config)}});
  json config = study_json(cfg);
  config["cell_metadata"] = cells;
  const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const json manifest =
      manifest_json(args, "simulate", inputs, cfg.master_seed, config, {"results.csv", "table.txt"}, runtime);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return any_failed ? kNumericalError : kSuccess;
}

// ---------------------------------------------------------------------------
// generate subcommand

struct GenerateOptions {
  std::string family = "linear_null";
  double a = 0.0;
  Index n = 200;
  Index p = 5;
  std::string sigma = "identity";
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_generate(const GenerateOptions& o) {
  sim::Dgp dgp;
  const auto family = sim::parse_family(o.family);
  if (!family || *family == sim::Family::custom) throw Error(ErrorKind::ConfigInvalid, "--family: unknown family " + o.family);
  const auto sigma = sim::parse_covariance(o.sigma);
  if (!sigma) throw Error(ErrorKind::ConfigInvalid, "--sigma: expected identity or geometric");
  dgp.family = *family;
  dgp.a = o.a;
  dgp.n = o.n;
  dgp.p = o.p;
  dgp.sigma = *sigma;
  Rng rng = make_stream(o.seed, {0});
  const Dataset data = sim::generate(dgp, rng);
  write_csv(o.out, data, default_predictor_names(data.d()), "y");
  return kSuccess;
}

// ---------------------------------------------------------------------------
// rerun subcommand

int cmd_rerun(const std::string& manifest_path, const std::string& out_override, std::ostream& out,
              std::ostream& err) {
  json manifest;
  try {
    manifest = json::parse(read_file(manifest_path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!manifest.contains("argv") || !manifest["argv"].is_array()) {
    throw Error(ErrorKind::ConfigInvalid, "manifest.argv: missing");
  }
  if (manifest.contains("inputs")) {
    for (const auto& input : manifest["inputs"]) {
      const std::string path = input.at("path").get<std::string>();
      const std::string expected = input.at("sha256").get<std::string>();
      if (file_sha256(path) != expected) {
        throw Error(ErrorKind::InvalidArgument, "input " + path + " does not match the manifest digest");
      }
    }
  }
  std::vector<std::string> args{"wicm"};
  for (const auto& a : manifest["argv"]) args.push_back(a.get<std::string>());
  if (!out_override.empty()) {
    bool replaced = false;
    for (std::size_t i = 1; i + 1 < args.size(); ++i) {
      if (args[i] == "--out") {
        args[i + 1] = out_override;
        replaced = true;
      }
    }
    if (!replaced) {
      args.push_back("--out");
      args.push_back(out_override);
    }
  }
  return run_cli(args, out, err);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weighted residual-process specification tests for regression models", "wicm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  TestOptions test;
  auto* test_cmd = app.add_subcommand("test", "Test a linear regression fit on a CSV dataset");
  test_cmd->add_option("--data", test.data, "Input CSV with a header row")->required();
  test_cmd->add_option("--response", test.response, "Response column name")->required();
  test_cmd->add_flag("--standardize", test.standardize, "Standardize predictors and response first");
  test_cmd->add_flag("--intercept", test.intercept, "Include an intercept in the null model");
  test_cmd->add_option("--weight", test.weight, "Weight construction")
      ->check(CLI::IsMember({"directional", "nonparametric"}))
      ->capture_default_str();
  test_cmd->add_option("--alt", test.alt, "Directional shape: square, cube, cos, cos06, sin, abs, exp")
      ->capture_default_str();
  test_cmd->add_option("--index", test.index, "Index for --alt: fitted, equal, first:K or a comma list")
      ->capture_default_str();
  test_cmd->add_option("--bootstrap", test.B, "Bootstrap replications")->capture_default_str();
  test_cmd->add_option("--vn", test.v_n, "Smoothing scale of the residual bootstrap")->capture_default_str();
  test_cmd->add_option("--alpha", test.alpha, "Significance level")->capture_default_str();
  test_cmd->add_option("--seed", test.seed, "Master seed")->required();
  test_cmd->add_option("--workers", test.workers, "Bootstrap threads")->capture_default_str();
  test_cmd->add_option("--out", test.out_dir, "Directory for report, result, bootstrap and manifest files");

  SimulateOptions simulate;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a Monte Carlo size/power study");
  sim_cmd->add_option("--config", simulate.config, "Study config (JSON)")->required();
  sim_cmd->add_option("--out", simulate.out_dir, "Output directory")->required();
  sim_cmd->add_option("--reps", simulate.reps, "Override reps");
  sim_cmd->add_option("--bootstrap", simulate.B, "Override bootstrap replications");
  sim_cmd->add_option("--seed", simulate.seed, "Override master seed");
  sim_cmd->add_option("--workers", simulate.workers, "Override worker threads");

  GenerateOptions generate;
  auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic dataset as CSV");
  gen_cmd->add_option("--family", generate.family, "H1, H2, H3, H4 or linear_null")->capture_default_str();
  gen_cmd->add_option("--a", generate.a, "Departure magnitude")->capture_default_str();
  gen_cmd->add_option("--n", generate.n, "Observations")->capture_default_str();
  gen_cmd->add_option("--p", generate.p, "Predictors")->capture_default_str();
  gen_cmd->add_option("--sigma", generate.sigma, "identity or geometric")->capture_default_str();
  gen_cmd->add_option("--seed", generate.seed, "Seed")->required();
  gen_cmd->add_option("--out", generate.out, "Output CSV path")->required();

  std::string manifest_path;
  std::string rerun_out;
  auto* rerun_cmd = app.add_subcommand("rerun", "Repeat a run recorded in a manifest");
  rerun_cmd->add_option("--manifest", manifest_path, "manifest.json from an earlier run")->required();
  rerun_cmd->add_option("--out", rerun_out, "Write outputs here instead of the recorded directory");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (*test_cmd) return cmd_test(test, args, out);
    if (*sim_cmd) return cmd_simulate(simulate, args, out, err);
    if (*gen_cmd) return cmd_generate(generate);
    if (*rerun_cmd) return cmd_rerun(manifest_path, rerun_out, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kConfigError;
}

}  // namespace wicm::cli
