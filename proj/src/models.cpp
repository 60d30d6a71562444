#include "qscare/models.hpp"

#include "qscare/care_dense.hpp"
#include "qscare/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace qscare {

BandedMatrix neumann_laplacian(Index n, double dx) {
  require(n >= 3 && dx > 0.0, "neumann_laplacian: need n >= 3 and dx > 0");
  const double s = 1.0 / (dx * dx);
  BandedMatrix l = BandedMatrix::tridiag(n, s, -2.0 * s, s);
  l.at(0, 0) = -s;
  l.at(n - 1, n - 1) = -s;
  return l.symmetrized();
}

double allen_cahn_dx(const AllenCahnParams& p) { return 2.0 * p.half_length / static_cast<double>(p.n - 1); }

Vec allen_cahn_initial(const AllenCahnParams& p) {
  const double dx = allen_cahn_dx(p);
  Vec y(p.n);
  for (Index i = 0; i < p.n; ++i) y(i) = std::sin(std::numbers::pi * (-p.half_length + static_cast<double>(i) * dx));
  return y;
}

SdreModel allen_cahn_model(const AllenCahnParams& p) {
  require(p.n >= 3, "allen_cahn_model: n must be at least 3");
  require(p.half_length > 0.0 && p.sigma > 0.0 && p.gamma_tilde > 0.0, "allen_cahn_model: parameters must be positive");
  const Index n = p.n;
  const double dx = allen_cahn_dx(p);
  const double gamma = p.gamma_tilde * dx;
  const BandedMatrix diff = p.sigma * neumann_laplacian(n, dx);

  SdreModel m;
  m.name = "allen-cahn";
  m.n = n;
  m.m = n;
  m.nr = n;
  m.structure = ModelStructure::banded;
  m.stiff = diff;
  m.explicit_rhs = [](const Vec& y, const Vec& u) { return Vec(y - y.cwiseProduct(y).cwiseProduct(y) + u); };
  m.rhs = [diff, ex = m.explicit_rhs](const Vec& y, const Vec& u) { return Vec(diff.matvec(y) + ex(y, u)); };
  m.running_cost = [dx, gamma](const Vec& y, const Vec& u) { return dx * y.squaredNorm() + gamma * u.squaredNorm(); };

  // sigma A0 + I - diag(y o y)
  auto a_of = [diff, n](const Vec& y) {
    BandedMatrix a = diff;
    for (Index i = 0; i < n; ++i) a.at(i, i) += 1.0 - y(i) * y(i);
    return a.symmetrized();
  };
  m.care_banded = [a_of, n, dx, gamma](const Vec& y) {
    return BandedCare{a_of(y), BandedMatrix::identity(n, 1.0 / gamma).symmetrized(),
                      BandedMatrix::identity(n, dx).symmetrized()};
  };
  m.care = [a_of, n, dx, gamma](const Vec& y) {
    return DenseCare{a_of(y).to_dense(), Mat::Identity(n, n) / gamma, dx * Mat::Identity(n, n)};
  };
  m.closed_form = [a_of, n, dx, gamma](const Vec& y) {
    return care_closed_form_sym(a_of(y).to_dense(), dx * Mat::Identity(n, n), gamma);
  };
  m.control = [gamma](const Vec& y, const std::function<Vec(const Vec&)>& apply_x) {
    return Vec(-apply_x(y) / gamma);
  };
  return m;
}

Mat cucker_smale_interaction(const Vec& positions) {
  const Index n = positions.size();
  require(n >= 2, "cucker_smale_interaction: need at least two agents");
  const double inv_n = 1.0 / static_cast<double>(n);
  Mat a = Mat::Zero(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      if (i == j) continue;
      const double d = positions(i) - positions(j);
      a(i, j) = inv_n / (1.0 + d * d);
    }
  for (Index i = 0; i < n; ++i) a(i, i) = -a.row(i).sum();
  return a;
}

Mat cucker_smale_x22(const Mat& interaction) {
  const Index n = interaction.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  return care_closed_form_sym(interaction, 3.0 * inv_n * Mat::Identity(n, n), inv_n);
}

std::vector<Index> sort_positions(const Vec& positions) {
  std::vector<Index> p(static_cast<size_t>(positions.size()));
  std::iota(p.begin(), p.end(), Index{0});
  std::stable_sort(p.begin(), p.end(), [&](Index a, Index b) { return positions(a) < positions(b); });
  return p;
}

SdreModel cucker_smale_model(Index n_agents, bool sort) {
  require(n_agents >= 2, "cucker_smale_model: need at least two agents");
  const Index na = n_agents;
  const double inv_n = 1.0 / static_cast<double>(na);
  SdreModel m;
  m.name = "cucker-smale";
  m.n = 2 * na;
  m.m = na;
  m.nr = na;
  m.structure = ModelStructure::hierarchical;
  m.rhs = [na](const Vec& z, const Vec& u) {
    const Vec y = z.head(na), v = z.tail(na);
    Vec out(2 * na);
    out.head(na) = v;
    out.tail(na) = cucker_smale_interaction(y) * v + u;
    return out;
  };
  m.running_cost = [inv_n](const Vec& z, const Vec& u) { return inv_n * (z.squaredNorm() + u.squaredNorm()); };
  m.care = [na, inv_n](const Vec& z) {
    return DenseCare{cucker_smale_interaction(z.head(na)), static_cast<double>(na) * Mat::Identity(na, na),
                     3.0 * inv_n * Mat::Identity(na, na)};
  };
  m.closed_form = [na](const Vec& z) { return cucker_smale_x22(cucker_smale_interaction(z.head(na))); };
  if (sort) m.ordering = [na](const Vec& z) { return sort_positions(z.head(na)); };
  // u = -y - R^-1 X22 v
  m.control = [na](const Vec& z, const std::function<Vec(const Vec&)>& apply_x) {
    return Vec(-z.head(na) - static_cast<double>(na) * apply_x(Vec(z.tail(na))));
  };
  return m;
}

Vec cucker_smale_initial(Index n_agents, std::uint64_t seed) {
  auto g = make_rng(seed, 62, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec z(2 * n_agents);
  for (Index i = 0; i < z.size(); ++i) z(i) = u(g);
  return z;
}

}  // namespace qscare
