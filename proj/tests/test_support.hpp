#pragma once

#include <Eigen/Dense>

#include "dpdate/rng.hpp"
#include "dpdate/sim.hpp"

namespace testing {

inline dpdate::SimConfig dgp(int t1 = 100, int t2 = 20) {
  dpdate::SimConfig c;
  c.t1 = t1;
  c.t2 = t2;
  return c;
}

inline dpdate::PanelDataset dgp_panel(int rep = 0, int t1 = 100, int t2 = 20) {
  return dpdate::gen_panel(dgp(t1, t2), rep).panel;
}

inline Eigen::MatrixXd normal_matrix(dpdate::RandomStream& rng, Eigen::Index rows,
                                     Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

inline Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd X(z.rows(), z.cols() + 1);
  X.col(0).setOnes();
  X.rightCols(z.cols()) = z;
  return X;
}

}  // namespace testing
