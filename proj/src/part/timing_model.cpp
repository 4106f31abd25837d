#include "desgn/timing_model.hpp"

#include <Eigen/Dense>

namespace desgn {

std::vector<TimingSample> load_timing_samples(const std::string& path) {
  CsvTable t = read_csv(path);
  if (t.header.size() < 5 || t.header[0] != "kind")
    throw InputError("timing_samples.csv must be kind,n_buses,n_loads,timepoints,observed_time_s");
  std::vector<TimingSample> out;
  for (const auto& row : t.rows) {
    TimingSample s;
    s.kind = row[0];
    if (s.kind != "load" && s.kind != "noload")
      throw InputError("unknown timing sample kind '" + s.kind + "'");
    s.n_buses = parse_int(row[1], "timing_samples.csv");
    s.n_loads = parse_int(row[2], "timing_samples.csv");
    s.timepoints = parse_int(row[3], "timing_samples.csv");
    s.observed_time_s = parse_double(row[4], "timing_samples.csv");
    if (s.observed_time_s <= 0) throw InputError("observed_time_s must be positive");
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

struct FitOut {
  Eigen::VectorXd coef;
  double r2;
};

FitOut least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const std::vector<std::string>& feature_names) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < X.cols()) {
    // name one collinear feature: the first column expressible by the others
    for (int j = 0; j < X.cols(); ++j) {
      Eigen::MatrixXd rest(X.rows(), X.cols() - 1);
      int c = 0;
      for (int k = 0; k < X.cols(); ++k)
        if (k != j) rest.col(c++) = X.col(k);
      Eigen::VectorXd fit = rest.colPivHouseholderQr().solve(X.col(j));
      if ((rest * fit - X.col(j)).norm() < 1e-9 * (1.0 + X.col(j).norm()))
        throw ModelError("regression is rank deficient: feature '" + feature_names[j] +
                         "' is collinear");
    }
    throw ModelError("regression is rank deficient");
  }
  FitOut out;
  out.coef = qr.solve(y);
  double ss_res = (y - X * out.coef).squaredNorm();
  double mean = y.mean();
  double ss_tot = (y.array() - mean).square().sum();
  out.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return out;
}

}  // namespace

RegressionModel fit_regression(const std::vector<TimingSample>& samples) {
  std::vector<const TimingSample*> load, noload;
  for (const auto& s : samples)
    (s.kind == "load" ? load : noload).push_back(&s);
  if (load.size() < 3) throw ModelError("need at least 3 load-kind timing samples");
  if (noload.size() < 3) throw ModelError("need at least 3 noload-kind timing samples");

  RegressionModel model;
  {
    Eigen::MatrixXd X(load.size(), 3);
    Eigen::VectorXd y(load.size());
    for (size_t i = 0; i < load.size(); ++i) {
      X(i, 0) = 1.0;
      X(i, 1) = load[i]->n_buses;
      X(i, 2) = load[i]->n_loads;
      y[i] = load[i]->observed_time_s;
    }
    FitOut fit = least_squares(X, y, {"intercept", "n_buses", "n_loads"});
    model.load_coef = fit.coef;
    model.r2_load = fit.r2;
  }
  {
    Eigen::MatrixXd X(noload.size(), 2);
    Eigen::VectorXd y(noload.size());
    for (size_t i = 0; i < noload.size(); ++i) {
      X(i, 0) = 1.0;
      X(i, 1) = noload[i]->n_buses;
      y[i] = noload[i]->observed_time_s;
    }
    FitOut fit = least_squares(X, y, {"intercept", "n_buses"});
    model.noload_coef = fit.coef;
    model.r2_noload = fit.r2;
  }
  return model;
}

}  // namespace desgn
