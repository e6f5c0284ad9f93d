#include "dirlap/oracle.hpp"

#include <cmath>
#include <limits>

namespace dirlap::oracle {

namespace {

void check_cap(int n) {
  if (n > kDimCap)
    fail(Status::dimension_cap, "oracle: order " + std::to_string(n) + " exceeds cap " +
                                    std::to_string(kDimCap));
}

}  // namespace

Eigen::VectorXd to_eigen(const Vec& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
}

Vec from_eigen(const Eigen::VectorXd& v) { return Vec(v.data(), v.data() + v.size()); }

Eigen::MatrixXd dense(const SparseGraph& g) {
  check_cap(g.n());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(g.n(), g.n());
  for (const Entry& e : g.entries()) m(e.row, e.col) += e.w;
  return m;
}

Eigen::MatrixXd dense_laplacian(const DirectedLaplacian& L) { return dense(L.matrix()); }

Eigen::MatrixXd dense_pinv(const Eigen::MatrixXd& m) {
  check_cap(static_cast<int>(m.rows()));
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  double cut = s.size() > 0 ? kSvdCutoff * s(0) : 0.0;
  Eigen::VectorXd si = s;
  for (long i = 0; i < si.size(); ++i) si(i) = s(i) > cut ? 1.0 / s(i) : 0.0;
  return svd.matrixV() * si.asDiagonal() * svd.matrixU().transpose();
}

Eigen::MatrixXd psd_root_pinv(const Eigen::MatrixXd& u) {
  check_cap(static_cast<int>(u.rows()));
  Eigen::MatrixXd us = 0.5 * (u + u.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(us);
  const auto& ev = eig.eigenvalues();
  double top = ev.size() > 0 ? std::max(0.0, ev(ev.size() - 1)) : 0.0;
  if (ev.size() > 0 && ev(0) < -1e-10 * std::max(top, 1.0))
    fail(Status::not_psd_symmetrization,
         "symmetrization has negative eigenvalue " + std::to_string(ev(0)));
  double cut = kSvdCutoff * top;
  Eigen::VectorXd d = ev;
  for (long i = 0; i < d.size(); ++i) d(i) = ev(i) > cut ? 1.0 / std::sqrt(ev(i)) : 0.0;
  return eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().transpose();
}

double approx_norm(const Eigen::MatrixXd& a, const Eigen::MatrixXd& atil) {
  check_cap(static_cast<int>(a.rows()));
  if (a.rows() != atil.rows() || a.cols() != atil.cols())
    fail(Status::dimension_mismatch, "approx_norm: shape mismatch");
  Eigen::MatrixXd u = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(u);
  const auto& ev = eig.eigenvalues();
  double top = ev.size() > 0 ? std::max(0.0, ev(ev.size() - 1)) : 0.0;
  if (ev.size() > 0 && ev(0) < -1e-10 * std::max(top, 1.0))
    fail(Status::not_psd_symmetrization,
         "approx_norm: U_A has negative eigenvalue " + std::to_string(ev(0)));

  Eigen::MatrixXd delta = atil - a;
  double dscale = std::max({delta.cwiseAbs().maxCoeff() * delta.rows(), top, 1e-300});

  // kernel containment: ker(U_A) must be annihilated by delta on both sides
  double cut = kSvdCutoff * top;
  Eigen::MatrixXd rootpinv = eig.eigenvectors();
  Eigen::VectorXd d(ev.size());
  for (long i = 0; i < ev.size(); ++i) {
    if (ev(i) > cut) {
      d(i) = 1.0 / std::sqrt(ev(i));
    } else {
      d(i) = 0.0;
      Eigen::VectorXd q = eig.eigenvectors().col(i);
      if ((delta * q).norm() > 1e-8 * dscale || (delta.transpose() * q).norm() > 1e-8 * dscale)
        return std::numeric_limits<double>::infinity();
    }
  }
  Eigen::MatrixXd upinv_root = rootpinv * d.asDiagonal() * rootpinv.transpose();
  Eigen::MatrixXd b = upinv_root * delta * upinv_root;

  Eigen::BDCSVD<Eigen::MatrixXd> svd(b);
  double direct = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;

  // Rayleigh form: sup x^T delta y / sqrt(x^T U x * y^T U y) equals the top
  // eigenvalue of the symmetric embedding [[0, B], [B^T, 0]].
  long n = b.rows();
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  block.topRightCorner(n, n) = b;
  block.bottomLeftCorner(n, n) = b.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> beig(block);
  double rayleigh = beig.eigenvalues().size() > 0 ? beig.eigenvalues().maxCoeff() : 0.0;

  if (std::fabs(direct - rayleigh) > 1e-9 * std::max(1.0, direct))
    fail(Status::invalid_argument, "approx_norm: SVD and Rayleigh routes disagree: " +
                                       std::to_string(direct) + " vs " +
                                       std::to_string(rayleigh));
  return direct;
}

double approx_norm(const DirectedLaplacian& a, const DirectedLaplacian& atil) {
  return approx_norm(dense_laplacian(a), dense_laplacian(atil));
}

std::pair<double, double> generalized_eigs(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  check_cap(static_cast<int>(a.rows()));
  Eigen::MatrixXd as = 0.5 * (a + a.transpose());
  Eigen::MatrixXd bs = 0.5 * (b + b.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> beig(bs);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> aeig(as);
  double btop = beig.eigenvalues().cwiseAbs().maxCoeff();
  double atop = aeig.eigenvalues().cwiseAbs().maxCoeff();
  double bcut = kSvdCutoff * std::max(btop, 1e-300);
  double acut = kSvdCutoff * std::max(atop, 1e-300);

  // shared-kernel precondition, checked both ways
  for (long i = 0; i < beig.eigenvalues().size(); ++i)
    if (std::fabs(beig.eigenvalues()(i)) <= bcut) {
      Eigen::VectorXd q = beig.eigenvectors().col(i);
      if ((as * q).norm() > 1e-8 * std::max(atop, 1e-300))
        fail(Status::kernel_mismatch, "generalized_eigs: ker(B) not annihilated by A");
    }
  for (long i = 0; i < aeig.eigenvalues().size(); ++i)
    if (std::fabs(aeig.eigenvalues()(i)) <= acut) {
      Eigen::VectorXd q = aeig.eigenvectors().col(i);
      if ((bs * q).norm() > 1e-8 * std::max(btop, 1e-300))
        fail(Status::kernel_mismatch, "generalized_eigs: ker(A) not annihilated by B");
    }

  long r = 0;
  for (long i = 0; i < beig.eigenvalues().size(); ++i)
    if (beig.eigenvalues()(i) > bcut) ++r;
  if (r == 0) fail(Status::empty_matrix, "generalized_eigs: B has empty image");
  Eigen::MatrixXd q(bs.rows(), r);
  Eigen::VectorXd dinv(r);
  long k = 0;
  for (long i = 0; i < beig.eigenvalues().size(); ++i)
    if (beig.eigenvalues()(i) > bcut) {
      q.col(k) = beig.eigenvectors().col(i);
      dinv(k) = 1.0 / std::sqrt(beig.eigenvalues()(i));
      ++k;
    }
  Eigen::MatrixXd c = dinv.asDiagonal() * (q.transpose() * as * q) * dinv.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ceig(0.5 * (c + c.transpose()));
  return {ceig.eigenvalues().minCoeff(), ceig.eigenvalues().maxCoeff()};
}

bool psd_leq(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  check_cap(static_cast<int>(a.rows()));
  Eigen::MatrixXd diff = 0.5 * (b + b.transpose()) - 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(diff);
  double scale = std::max({a.cwiseAbs().maxCoeff() * a.rows(), b.cwiseAbs().maxCoeff() * b.rows(),
                           1e-300});
  return eig.eigenvalues().minCoeff() >= -1e-8 * scale;
}

double u_norm(const Eigen::MatrixXd& u, const Eigen::VectorXd& v) {
  double q = v.dot(0.5 * (u + u.transpose()) * v);
  return std::sqrt(std::max(0.0, q));
}

Eigen::VectorXd kernel_vector(const Eigen::MatrixXd& m) {
  check_cap(static_cast<int>(m.rows()));
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  return svd.matrixV().col(m.cols() - 1);
}

Vec exact_stationary(const DirectedLaplacian& L) {
  if (L.n() == 0) fail(Status::empty_matrix, "exact_stationary: empty");
  Eigen::VectorXd x = kernel_vector(dense_laplacian(L));
  // kernel of a strongly connected Laplacian is one-signed; normalize to positive
  double s = x.sum() >= 0 ? 1.0 : -1.0;
  x *= s;
  Vec pi(L.n());
  double total = 0;
  double floor = -1e-10 * x.cwiseAbs().maxCoeff();
  for (int i = 0; i < L.n(); ++i) {
    double v = x(i) * L.out_degrees()[i];
    if (v < floor)
      fail(Status::not_strongly_connected, "exact_stationary: kernel is not one-signed");
    pi[i] = std::max(0.0, v);
    total += pi[i];
  }
  if (total <= 0) fail(Status::not_strongly_connected, "exact_stationary: zero kernel mass");
  for (double& v : pi) v /= total;
  return pi;
}

double sym_condition_number(const Eigen::MatrixXd& m) {
  check_cap(static_cast<int>(m.rows()));
  Eigen::MatrixXd u = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(u);
  double top = eig.eigenvalues().maxCoeff();
  double cut = kSvdCutoff * std::max(top, 1e-300);
  double lo = std::numeric_limits<double>::infinity();
  for (long i = 0; i < eig.eigenvalues().size(); ++i) {
    double v = eig.eigenvalues()(i);
    if (v > cut) lo = std::min(lo, v);
  }
  if (!std::isfinite(lo) || lo <= 0) fail(Status::empty_matrix, "sym_condition_number: empty image");
  return top / lo;
}

Eigen::VectorXd solve_dense(const Eigen::MatrixXd& m, const Eigen::VectorXd& b) {
  check_cap(static_cast<int>(m.rows()));
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (lu.isInvertible()) return lu.solve(b);
  return dense_pinv(m) * b;
}

}  // namespace dirlap::oracle
