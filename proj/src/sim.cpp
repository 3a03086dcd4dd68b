#include "wicm/sim.hpp"

#include "wicm/csv.hpp"
#include "wicm/error.hpp"
#include "wicm/parallel.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

namespace wicm::sim {

const char* to_string(Family f) noexcept {
  switch (f) {
    case Family::H1: return "H1";
    case Family::H2: return "H2";
    case Family::H3: return "H3";
    case Family::H4: return "H4";
    case Family::linear_null: return "linear_null";
    case Family::custom: return "custom";
  }
  return "custom";
}

const char* to_string(CovarianceKind c) noexcept {
  return c == CovarianceKind::identity ? "identity" : "geometric";
}

const char* to_string(Method m) noexcept {
  switch (m) {
    case Method::WICM1: return "WICM1";
    case Method::WICM2: return "WICM2";
    case Method::ICM: return "ICM";
  }
  return "ICM";
}

std::optional<Family> parse_family(const std::string& s) {
  for (Family f : {Family::H1, Family::H2, Family::H3, Family::H4, Family::linear_null, Family::custom}) {
    if (s == to_string(f)) return f;
  }
  return std::nullopt;
}

std::optional<CovarianceKind> parse_covariance(const std::string& s) {
  if (s == "identity") return CovarianceKind::identity;
  if (s == "geometric") return CovarianceKind::geometric;
  return std::nullopt;
}

std::optional<Method> parse_method(const std::string& s) {
  for (Method m : {Method::WICM1, Method::WICM2, Method::ICM}) {
    if (s == to_string(m)) return m;
  }
  return std::nullopt;
}

void Dgp::validate() const {
  if (n < 1 || p < 1) throw Error(ErrorKind::InvalidArgument, "DGP needs n >= 1 and p >= 1");
  if (!std::isfinite(a)) throw Error(ErrorKind::InvalidArgument, "departure magnitude must be finite");
  if ((family == Family::H2 || family == Family::H3) && p % 2 != 0) {
    throw Error(ErrorKind::InvalidArgument, std::string(to_string(family)) + " needs even p");
  }
  if ((family == Family::H2 || family == Family::H3) && p < 2) {
    throw Error(ErrorKind::InvalidArgument, std::string(to_string(family)) + " needs p >= 2");
  }
  if (family == Family::H4 && p < 10) throw Error(ErrorKind::InvalidArgument, "H4 needs p >= 10");
  if (family == Family::custom && !custom_departure) {
    throw Error(ErrorKind::InvalidArgument, "custom family needs a departure function");
  }
}

VectorXd beta0(Index p) { return VectorXd::Constant(p, 1.0 / std::sqrt(static_cast<double>(p))); }

VectorXd beta1(Index p) {
  const Index half = p / 2;
  VectorXd b = VectorXd::Zero(p);
  if (half > 0) b.head(half).setConstant(1.0 / std::sqrt(static_cast<double>(half)));
  return b;
}

VectorXd linear_coefficients(const Dgp& dgp) {
  if (dgp.family == Family::H4) {
    VectorXd e = VectorXd::Zero(dgp.p);
    e(0) = 1.0;
    return e;
  }
  return beta0(dgp.p);
}

MatrixXd covariance_matrix(CovarianceKind kind, Index p) {
  if (kind == CovarianceKind::identity) return MatrixXd::Identity(p, p);
  MatrixXd s(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) s(i, j) = std::pow(2.0, -static_cast<double>(std::abs(i - j)));
  }
  return s;
}

namespace {

constexpr double pi = std::numbers::pi;

double h4_shape(const VectorXd& x) {
  return std::abs(x(1)) + std::pow(x(2), 3) - x(3) * x(3) + std::pow(x(4), 3) + x(5) * x(6) +
         std::cos(pi * x(7)) + std::sin(0.5 * pi * x(8) * x(9));
}

}  // namespace

double departure(const Dgp& dgp, const VectorXd& x) {
  switch (dgp.family) {
    case Family::H1: {
      const double u = beta0(dgp.p).dot(x);
      return std::cos(0.6 * pi * u);
    }
    case Family::H2: {
      const double v = beta1(dgp.p).dot(x);
      return v * v;
    }
    case Family::H3: {
      const double u = beta0(dgp.p).dot(x);
      const double v = beta1(dgp.p).dot(x);
      return v * v * v + std::cos(pi * v) + u * v;
    }
    case Family::H4: return h4_shape(x);
    case Family::linear_null: return 0.0;
    case Family::custom: return dgp.custom_departure(x);
  }
  return 0.0;
}

namespace {

MatrixXd draw_predictors(const Dgp& dgp, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd Z(dgp.n, dgp.p);
  for (Index i = 0; i < dgp.n; ++i) {
    for (Index k = 0; k < dgp.p; ++k) Z(i, k) = normal(rng);
  }
  if (dgp.sigma == CovarianceKind::identity) return Z;
  const MatrixXd lower = covariance_matrix(dgp.sigma, dgp.p).llt().matrixL();
  return Z * lower.transpose();
}

VectorXd draw_errors(Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd eps(n);
  for (Index i = 0; i < n; ++i) eps(i) = normal(rng);
  return eps;
}

}  // namespace

Dataset generate(const Dgp& dgp, Rng& rng) {
  dgp.validate();
  MatrixXd X = draw_predictors(dgp, rng);
  VectorXd y = X * linear_coefficients(dgp) + draw_errors(dgp.n, rng);
  if (dgp.a != 0.0) {
    VectorXd row(dgp.p);
    for (Index i = 0; i < dgp.n; ++i) {
      row = X.row(i).transpose();
      y(i) += dgp.a * departure(dgp, row);
    }
  }
  return Dataset(std::move(X), std::move(y));
}

Dataset generate_local(const Dgp& base, const LocalAlternativeSpec& alt, Rng& rng) {
  if (base.family != Family::linear_null) {
    throw Error(ErrorKind::InvalidArgument, "local alternatives need a linear_null base");
  }
  if (!alt.S) throw Error(ErrorKind::InvalidArgument, "local alternative needs S");
  base.validate();
  MatrixXd X = draw_predictors(base, rng);
  VectorXd y = X * beta0(base.p) + draw_errors(base.n, rng);
  VectorXd s(base.n);
  VectorXd row(base.p);
  for (Index i = 0; i < base.n; ++i) {
    row = X.row(i).transpose();
    s(i) = alt.S(row);
  }
  const double rate = std::pow(static_cast<double>(base.n), -alt.rate_exponent);
  y += rate * (s.array() - s.mean()).matrix();
  return Dataset(std::move(X), std::move(y));
}

DirectionalAlternative directional_class(const Dgp& dgp) {
  const VectorXd b0 = beta0(dgp.p);
  const VectorXd b1 = beta1(dgp.p);
  switch (dgp.family) {
    case Family::H1:
      return make_feature_alternative({[b0](const VectorXd& x) { return std::cos(0.6 * pi * b0.dot(x)); }},
                                      "theta*cos(0.6*pi*beta0'x)");
    case Family::H2:
      return make_feature_alternative({[b1](const VectorXd& x) {
                                        const double v = b1.dot(x);
                                        return v * v;
                                      }},
                                      "theta*(beta1'x)^2");
    case Family::H3:
      return make_feature_alternative(
          {[b1](const VectorXd& x) { return std::pow(b1.dot(x), 3); },
           [b1](const VectorXd& x) { return std::cos(pi * b1.dot(x)); },
           [b0, b1](const VectorXd& x) { return b0.dot(x) * b1.dot(x); }},
          "theta1*(beta1'x)^3+theta2*cos(pi*beta1'x)+theta3*(beta0'x)(beta1'x)");
    case Family::H4:
      return make_feature_alternative({h4_shape}, "theta*H4-shape(x1..x10)");
    case Family::custom:
      if (dgp.custom_departure) {
        return make_feature_alternative({dgp.custom_departure}, "theta*custom-departure");
      }
      break;
    case Family::linear_null:
      break;
  }
  throw Error(ErrorKind::InvalidArgument,
              std::string("no directional alternative class for family ") + to_string(dgp.family));
}

void SimStudyConfig::validate() const {
  if (reps < 1) throw Error(ErrorKind::ConfigInvalid, "reps must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::ConfigInvalid, "alpha must lie in (0, 1)");
  bootstrap.validate();
  for (const auto& cell : grid) cell.dgp.validate();
}

namespace {

std::uint64_t dgp_key(const Dgp& dgp) {
  std::uint64_t key = splitmix64(static_cast<std::uint64_t>(dgp.family));
  key = splitmix64(key ^ std::bit_cast<std::uint64_t>(dgp.a));
  key = splitmix64(key ^ static_cast<std::uint64_t>(dgp.n));
  key = splitmix64(key ^ static_cast<std::uint64_t>(dgp.p));
  return splitmix64(key ^ static_cast<std::uint64_t>(dgp.sigma));
}

}  // namespace

bool run_replication(const StudyCell& cell, const SimStudyConfig& cfg, Index replication) {
  const std::uint64_t key = dgp_key(cell.dgp);
  const auto r = static_cast<std::uint64_t>(replication);
  Rng data_rng = make_stream(cfg.master_seed, {key, r});
  const Dataset data = generate(cell.dgp, data_rng);

  const ModelSpec null_model = make_linear_model(cell.dgp.p, false);
  const FittedModel fit = fit_least_squares(data, null_model);

  BootstrapConfig boot = cfg.bootstrap;
  boot.alpha = cfg.alpha;
  boot.workers = 1;
  boot.seed = substream_seed(cfg.master_seed, {key, r, 1 + static_cast<std::uint64_t>(cell.method)});

  switch (cell.method) {
    case Method::WICM1: {
      const WeightVector w = directional_weight(data, fit, null_model, directional_class(cell.dgp));
      return smooth_residual_bootstrap(data, null_model, fit, w, boot).reject;
    }
    case Method::WICM2: {
      const WeightVector w = sdr_nonparametric_weight(data, fit, null_model);
      return smooth_residual_bootstrap(data, null_model, fit, w, boot).reject;
    }
    case Method::ICM:
      return wild_bootstrap_icm(data, null_model, fit, boot).reject;
  }
  return false;
}

SimResult run_study(const SimStudyConfig& cfg) {
  cfg.validate();
  const std::size_t cells = cfg.grid.size();
  const auto reps = static_cast<std::size_t>(cfg.reps);

  struct Job {
    bool reject = false;
    double seconds = 0.0;
    std::string error;
  };
  std::vector<Job> jobs(cells * reps);
  parallel_for(jobs.size(), cfg.workers, [&](std::size_t index) {
    const std::size_t c = index / reps;
    const std::size_t r = index % reps;
    Job& job = jobs[index];
    const auto start = std::chrono::steady_clock::now();
    try {
      job.reject = run_replication(cfg.grid[c], cfg, static_cast<Index>(r));
    } catch (const std::exception& e) {
      job.error = "replication " + std::to_string(r) + ": " + e.what();
    }
    job.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  SimResult result;
  result.seed_echo = cfg.master_seed;
  for (std::size_t c = 0; c < cells; ++c) {
    const StudyCell& cell = cfg.grid[c];
    SimRow row;
    row.family = cell.dgp.family;
    row.a = cell.dgp.a;
    row.n = cell.dgp.n;
    row.p = cell.dgp.p;
    row.sigma = cell.dgp.sigma;
    row.method = cell.method;
    row.reps = cfg.reps;
    row.B = cfg.bootstrap.B;
    row.alpha = cfg.alpha;
    row.seed = cfg.master_seed;
    if (cell.method == Method::WICM1) {
      try {
        row.alternative_label = directional_class(cell.dgp).label;
      } catch (const std::exception&) {
      }
    } else if (cell.method == Method::WICM2) {
      row.alternative_label = "CSE+MERE index powers 2,3,4";
    }
    for (std::size_t r = 0; r < reps; ++r) {
      const Job& job = jobs[c * reps + r];
      row.runtime_seconds += job.seconds;
      if (!job.error.empty() && row.error.empty()) row.error = job.error;
      if (job.reject) ++row.rejections;
    }
    row.rejection_rate = row.ok() ? static_cast<double>(row.rejections) / static_cast<double>(row.reps)
                                  : std::nan("");
    result.rows.push_back(std::move(row));
  }
  return result;
}

namespace {

constexpr const char* kFlatHeader = "family,a,n,p,sigma,method,reps,B,alpha,rejection_rate,seed";

}  // namespace

std::string emit_flat_csv(const SimResult& result) {
  std::string out = std::string(kFlatHeader) + "\n";
  for (const SimRow& row : result.rows) {
    out += std::string(to_string(row.family)) + "," + format_number(row.a) + "," +
           std::to_string(row.n) + "," + std::to_string(row.p) + "," + to_string(row.sigma) + "," +
           to_string(row.method) + "," + std::to_string(row.reps) + "," + std::to_string(row.B) +
           "," + format_number(row.alpha) + "," +
           (row.ok() ? format_number(row.rejection_rate) : std::string("nan")) + "," +
           std::to_string(row.seed) + "\n";
  }
  return out;
}

SimResult parse_flat_csv(const std::string& text) {
  std::istringstream stream(text);
  std::string line;
  if (!std::getline(stream, line) || line != kFlatHeader) {
    throw Error(ErrorKind::InvalidArgument, "flat result CSV has an unexpected header");
  }
  SimResult result;
  auto number = [](const std::string& s) { return std::stod(s); };
  while (std::getline(stream, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 11) throw Error(ErrorKind::InvalidArgument, "flat result row needs 11 cells");
    SimRow row;
    const auto family = parse_family(cells[0]);
    const auto sigma = parse_covariance(cells[4]);
    const auto method = parse_method(cells[5]);
    if (!family || !sigma || !method) throw Error(ErrorKind::InvalidArgument, "bad tag in: " + line);
    row.family = *family;
    row.a = number(cells[1]);
    row.n = std::stoll(cells[2]);
    row.p = std::stoll(cells[3]);
    row.sigma = *sigma;
    row.method = *method;
    row.reps = std::stoll(cells[6]);
    row.B = std::stoll(cells[7]);
    row.alpha = number(cells[8]);
    row.seed = std::stoull(cells[10]);
    if (cells[9] == "nan") {
      row.rejection_rate = std::nan("");
      row.error = "failed";
    } else {
      row.rejection_rate = number(cells[9]);
      row.rejections = std::llround(row.rejection_rate * static_cast<double>(row.reps));
    }
    result.seed_echo = row.seed;
    result.rows.push_back(std::move(row));
  }
  return result;
}

std::string emit_rate_table(const SimResult& result) {
  // Blocks keyed by (family, sigma) in order of first appearance.
  std::vector<std::pair<Family, CovarianceKind>> blocks;
  for (const auto& row : result.rows) {
    const std::pair key{row.family, row.sigma};
    if (std::find(blocks.begin(), blocks.end(), key) == blocks.end()) blocks.push_back(key);
  }

  std::ostringstream out;
  for (const auto& [family, sigma] : blocks) {
    std::vector<std::pair<Index, Index>> columns;
    std::vector<Method> methods;
    std::vector<double> a_values;
    std::map<std::tuple<int, double, Index, Index>, const SimRow*> cells;
    const SimRow* any = nullptr;
    for (const auto& row : result.rows) {
      if (row.family != family || row.sigma != sigma) continue;
      any = &row;
      const std::pair np{row.n, row.p};
      if (std::find(columns.begin(), columns.end(), np) == columns.end()) columns.push_back(np);
      if (std::find(methods.begin(), methods.end(), row.method) == methods.end()) methods.push_back(row.method);
      if (std::find(a_values.begin(), a_values.end(), row.a) == a_values.end()) a_values.push_back(row.a);
      cells[{static_cast<int>(row.method), row.a, row.n, row.p}] = &row;
    }
    std::sort(a_values.begin(), a_values.end());

    out << "Empirical rejection rates: " << to_string(family) << ", Sigma " << to_string(sigma)
        << " (alpha " << format_number(any->alpha) << ", reps " << any->reps << ", B " << any->B
        << ")\n";
    out << std::left << std::setw(8) << "method" << std::setw(8) << "a";
    for (const auto& np : columns) out << std::setw(9) << ("n=" + std::to_string(np.first));
    out << "\n" << std::setw(16) << "";
    for (const auto& np : columns) out << std::setw(9) << ("p=" + std::to_string(np.second));
    out << "\n";
    for (Method m : methods) {
      bool first = true;
      for (double a : a_values) {
        out << std::setw(8) << (first ? to_string(m) : "") << std::setw(8) << format_number(a);
        first = false;
        for (const auto& np : columns) {
          const auto it = cells.find({static_cast<int>(m), a, np.first, np.second});
          std::ostringstream value;
          if (it == cells.end()) {
            value << "-";
          } else if (!it->second->ok()) {
            value << "error";
          } else {
            value << std::fixed << std::setprecision(3) << it->second->rejection_rate;
          }
          out << std::setw(9) << value.str();
        }
        out << "\n";
      }
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace wicm::sim
