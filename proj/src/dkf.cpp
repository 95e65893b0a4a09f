#include "dtse/dkf.hpp"

#include <algorithm>

namespace dtse::dkf {

NumericalFailure::NumericalFailure(const std::string& what, std::string node, int step)
    : std::runtime_error(node.empty() ? what : what + " (node " + node + ", step " + std::to_string(step) + ")"),
      reason_(what),
      node_(std::move(node)),
      step_(step) {}

ProcessNoise::ProcessNoise(Eigen::MatrixXd q) : q_(std::move(q)) {
  if (q_.rows() != q_.cols()) throw std::invalid_argument("ProcessNoise: Q must be square");
  diagonal_ = q_.isDiagonal(0.0);
  if (diagonal_) {
    const Eigen::VectorXd d = q_.diagonal();
    if ((d.array() <= 0.0).any()) throw NumericalFailure("ProcessNoise: Q has a non-positive variance");
    q_inv_ = d.cwiseInverse().asDiagonal();
  } else {
    Eigen::LLT<Eigen::MatrixXd> llt(q_);
    if (llt.info() != Eigen::Success) throw NumericalFailure("ProcessNoise: Q is not positive definite");
    q_inv_ = llt.solve(Eigen::MatrixXd::Identity(q_.rows(), q_.cols()));
    symmetrize(q_inv_);
  }
}

ProcessNoise ProcessNoise::cell_diagonal(int n_cells, double var_rho, double var_psi) {
  Eigen::VectorXd d(2 * n_cells);
  for (int i = 0; i < n_cells; ++i) {
    d[2 * i] = var_rho;
    d[2 * i + 1] = var_psi;
  }
  return ProcessNoise(d.asDiagonal().toDenseMatrix());
}

void symmetrize(Eigen::MatrixXd& m) {
  // Writing both triangles from the same average keeps m exactly symmetric.
  const Eigen::Index n = m.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double avg = 0.5 * (m(i, j) + m(j, i));
      m(i, j) = avg;
      m(j, i) = avg;
    }
  }
}

NodeFilter init_node(sensing::SensorId id, const arz::TrafficState& x0, const Eigen::MatrixXd& p0) {
  const auto dim = x0.vector().size();
  if (p0.rows() != dim || p0.cols() != dim) throw std::invalid_argument("init_node: P0 dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(p0);
  if (llt.info() != Eigen::Success || !p0.isApprox(p0.transpose())) {
    throw NumericalFailure("init_node: P0 is not symmetric positive definite", id.str(), 0);
  }
  NodeFilter node;
  node.id = id;
  node.x_hat = x0;
  node.info.Xi = llt.solve(Eigen::MatrixXd::Identity(dim, dim));
  symmetrize(node.info.Xi);
  node.info.xi = node.info.Xi * x0.vector();
  return node;
}

void local_update(InfoPair& info, const Eigen::Vector2d& y, const Eigen::MatrixXd& c, const Eigen::Matrix2d& r) {
  const Eigen::Matrix2d r_inv = r.inverse();
  info.xi += c.transpose() * (r_inv * y);
  info.Xi += c.transpose() * r_inv * c;
}

void local_update(InfoPair& info, const sensing::Measurement& m, const Eigen::Matrix2d& r) {
  const Eigen::Matrix2d r_inv = r.inverse();
  const Eigen::Index o = 2 * (m.cell - 1);
  info.xi.segment<2>(o) += r_inv * m.y;
  info.Xi.block<2, 2>(o, o) += r_inv;
}

Eigen::VectorXd recover_state(const InfoPair& info) {
  Eigen::LLT<Eigen::MatrixXd> llt(info.Xi);
  if (llt.info() != Eigen::Success) throw NumericalFailure("information matrix is not positive definite");
  return llt.solve(info.xi);
}

InfoPair predict(const InfoPair& fused, const arz::Linearization& lin, const ProcessNoise& q) {
  const Eigen::MatrixXd& q_inv = q.inverse();
  const Eigen::MatrixXd& lam = lin.lambda;

  Eigen::LLT<Eigen::MatrixXd> fused_llt(fused.Xi);
  if (fused_llt.info() != Eigen::Success) throw NumericalFailure("predict: fused information matrix is not positive definite");

  // With Xi_bar = L L^T and W = Lambda L^-T, M = L^-T (I + W^T Q^-1 W)^-1 L^-1,
  // so Q^-1 Lambda M Lambda^T Q^-1 = Z S^-1 Z^T with Z = Q^-1 W and
  // S = I + W^T Q^-1 W. S has eigenvalues >= 1, unlike Xi_bar + Lambda^T Q^-1 Lambda.
  const auto dim = lam.rows();
  const Eigen::MatrixXd wt = fused_llt.matrixL().solve(lam.transpose());
  Eigen::MatrixXd z;
  if (q.is_diagonal()) {
    z = q_inv.diagonal().asDiagonal() * wt.transpose();
  } else {
    z = q_inv * wt.transpose();
  }
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(dim, dim);
  s.noalias() += wt * z;
  symmetrize(s);
  Eigen::LLT<Eigen::MatrixXd> s_llt(s);
  if (s_llt.info() != Eigen::Success) throw NumericalFailure("predict: Xi_bar + L^T Q^-1 L is not positive definite");
  const Eigen::MatrixXd y = s_llt.matrixL().solve(z.transpose());

  InfoPair out;
  out.Xi = q_inv;
  out.Xi.noalias() -= y.transpose() * y;
  symmetrize(out.Xi);

  const Eigen::VectorXd x_fused = fused_llt.solve(fused.xi);
  const Eigen::VectorXd x_pred = lam * x_fused + lin.eta;
  out.xi = out.Xi * x_pred;
  return out;
}

arz::TrafficState project(const arz::TrafficState& x, const arz::ModelParams& p) {
  arz::TrafficState out = x;
  for (int i = 0; i < x.n_cells(); ++i) {
    out.set_cell(i, {std::clamp(x.rho(i), 0.0, p.rho_max), std::clamp(x.psi(i), 0.0, p.psi_max())});
  }
  return out;
}

void finalize_constraint(NodeFilter& node, const arz::ModelParams& p) {
  Eigen::LLT<Eigen::MatrixXd> llt(node.info.Xi);
  if (llt.info() != Eigen::Success) throw NumericalFailure("finalize: information matrix is not positive definite");
  node.x_hat = project(arz::TrafficState(llt.solve(node.info.xi)), p);
  node.info.xi = node.info.Xi * node.x_hat.vector();
}

}  // namespace dtse::dkf
