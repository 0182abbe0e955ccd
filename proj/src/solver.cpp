#include "nlspde/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

namespace nlspde {

using std::numbers::pi;

int Problem::steps() const {
  require(dt > 0 && T > 0, "problem: T and dt must be positive");
  const double r = T / dt;
  const long n = std::lround(r);
  require(n >= 1 && std::abs(r - n) <= 1e-9 * r, "problem: T must be a multiple of dt");
  return static_cast<int>(n);
}

int Problem::draws_per_step() const {
  return (noise ? noise->rank : 0) + static_cast<int>(sequence.size());
}

Stepper::Stepper(const Problem& prob) : dt_(prob.dt), A_(assemble_operator(prob.op, prob.grid)) {}

Vector Stepper::solve(double t, const Vector& rhs) {
  const double m = A_.modulation.at(t);
  auto it = cache_.find(m);
  if (it == cache_.end()) {
    Matrix M = Matrix::Identity(A_.interior_size, A_.interior_size) - dt_ * m * A_.entries;
    it = cache_.emplace(m, Eigen::LLT<Matrix>(M)).first;
    if (it->second.info() != Eigen::Success)
      throw NumericalError("stepper: implicit matrix is not positive definite");
  }
  return it->second.solve(rhs);
}

Vector Stepper::solve_shifted(double t, const Vector& rhs, const Vector& c) {
  if ((c.array() == 0.0).all()) return solve(t, rhs);
  Matrix M = -dt_ * A_.modulation.at(t) * A_.entries;
  M.diagonal() += Vector::Ones(c.size()) + c;
  Eigen::LLT<Matrix> llt(M);
  if (llt.info() != Eigen::Success) throw NumericalError("stepper: shifted matrix is not positive definite");
  return llt.solve(rhs);
}

namespace {

std::vector<Point> node_points(const Grid& g) {
  std::vector<Point> pts(g.size());
  for (int k = 0; k < g.size(); ++k) pts[k] = g.node(k);
  return pts;
}

void check_problem(const Problem& prob) {
  require(prob.u0.size() == prob.grid.size(), "problem: u0 does not match the grid");
  if (prob.noise) require(prob.noise->F.rows() == prob.grid.size(), "problem: noise factor does not match the grid");
  prob.steps();
}

// One semi-implicit step. Coefficients are evaluated at `coef`; the
// operator acts on the new state.
Vector advance(const Problem& prob, Stepper& stepper, const std::vector<Point>& pts, double t,
               const Vector& u, const Vector& coef, const Vector& z) {
  const int n = static_cast<int>(u.size());
  const double dt = prob.dt;
  Vector rhs = u;
  if (prob.drift)
    for (int i = 0; i < n; ++i) rhs[i] += dt * prob.drift(t, pts[i], coef[i]);
  Vector noise = Vector::Zero(n);
  int used = 0;
  if (prob.noise) {
    const int r = prob.noise->rank;
    Vector inc = increment_from_normals(*prob.noise, dt, z.head(r));
    used = r;
    if (prob.amplitude)
      for (int i = 0; i < n; ++i) noise[i] += prob.amplitude(t, pts[i], coef[i]) * inc[i];
  }
  const double sd = std::sqrt(dt);
  for (const auto& g : prob.sequence) {
    const double dw = sd * z[used++];
    for (int i = 0; i < n; ++i) noise[i] += g(t, pts[i], coef[i]) * dw;
  }
  rhs += noise;
  if (prob.scheme == NoiseScheme::balanced) {
    Vector c = Vector::Zero(n);
    for (int i = 0; i < n; ++i)
      if (coef[i] > 0) c[i] = std::abs(noise[i]) / coef[i];
    rhs += c.cwiseProduct(u);
    return stepper.solve_shifted(t + dt, rhs, c);
  }
  return stepper.solve(t + dt, rhs);
}

Trajectory empty_trajectory(const Problem& prob) {
  const int N = prob.steps();
  Trajectory tr;
  tr.times.resize(N + 1);
  for (int s = 0; s <= N; ++s) tr.times[s] = s * prob.dt;
  tr.fields.resize(prob.grid.size(), N + 1);
  tr.fields.col(0) = prob.u0;
  return tr;
}

// Fixed chunks keep the reduction order independent of the thread count.
template <typename F>
void parallel_chunks(long chunks, F&& body) {
  const long workers = std::max(1L, std::min<long>(chunks, std::thread::hardware_concurrency()));
  if (workers == 1) {
    for (long c = 0; c < chunks; ++c) body(c);
    return;
  }
  std::vector<std::thread> pool;
  for (long w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (long c = w; c < chunks; c += workers) body(c);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

Trajectory solve_semilinear(const Problem& prob, Stepper& stepper, RngStream& rng) {
  check_problem(prob);
  const auto pts = node_points(prob.grid);
  Trajectory tr = empty_trajectory(prob);
  tr.master_seed = rng.master;
  tr.path_id = rng.path;
  Vector z(prob.draws_per_step());
  for (int s = 0; s + 1 < static_cast<int>(tr.times.size()); ++s) {
    for (int k = 0; k < z.size(); ++k) z[k] = rng.normal();
    Vector u = tr.fields.col(s);
    tr.fields.col(s + 1) = advance(prob, stepper, pts, tr.times[s], u, u, z);
  }
  return tr;
}

Trajectory solve_semilinear(const Problem& prob, RngStream& rng) {
  Stepper stepper(prob);
  return solve_semilinear(prob, stepper, rng);
}

Vector solve_steady(const StableOperatorSpec& op, const Grid& grid, const SpaceFn& f) {
  OperatorMatrix A = assemble_operator(op, grid);
  Vector rhs(grid.size());
  for (int k = 0; k < grid.size(); ++k) rhs[k] = f(grid.node(k));
  Matrix M = -A.modulation.at(0.0) * A.entries;
  Eigen::LLT<Matrix> llt(M);
  if (llt.info() != Eigen::Success) throw NumericalError("solve_steady: -A is not positive definite");
  return llt.solve(rhs);
}

PicardResult solve_by_picard(const Problem& prob, int iterations, std::uint64_t master_seed,
                             std::uint64_t path_id) {
  require(iterations >= 1, "solve_by_picard: at least one sweep");
  check_problem(prob);
  const auto pts = node_points(prob.grid);
  const int N = prob.steps();
  // the draws are fixed once and reused by every sweep
  RngStream rng(master_seed, path_id);
  Matrix Z(prob.draws_per_step(), N);
  for (int s = 0; s < N; ++s)
    for (int k = 0; k < Z.rows(); ++k) Z(k, s) = rng.normal();

  Stepper stepper(prob);
  PicardResult res;
  Trajectory prev = empty_trajectory(prob);
  for (int s = 1; s <= N; ++s) prev.fields.col(s) = prob.u0;
  for (int it = 0; it < iterations; ++it) {
    Trajectory next = empty_trajectory(prob);
    for (int s = 0; s < N; ++s) {
      Vector u = next.fields.col(s), coef = prev.fields.col(s);
      next.fields.col(s + 1) = advance(prob, stepper, pts, next.times[s], u, coef, Z.col(s));
    }
    res.distances.push_back((next.fields - prev.fields).cwiseAbs().maxCoeff());
    prev = std::move(next);
  }
  for (size_t k = 3; k < res.distances.size(); ++k)
    if (res.distances[k] > 0 && res.distances[k] >= res.distances[k - 1]) res.stalled = true;
  prev.master_seed = master_seed;
  prev.path_id = path_id;
  res.iterate = std::move(prev);
  return res;
}

FieldFn truncated_amplitude(const Superlinear& sl, double m) {
  require(m > 0, "truncation level must be positive");
  require(sl.lambda >= 0, "lambda must be nonnegative");
  return [sl, m](double, const Point&, double u) {
    const double c = std::min(std::max(u, 0.0), m);
    return sl.xi * (sl.lambda == 0.0 ? c : std::pow(c, 1 + sl.lambda));
  };
}

Trajectory solve_superlinear_truncated(const Problem& prob, const Superlinear& sl, double m,
                                       RngStream& rng) {
  require(prob.u0.minCoeff() >= 0, "solve_superlinear_truncated: u0 must be nonnegative");
  Problem p = prob;
  p.amplitude = truncated_amplitude(sl, m);
  return solve_semilinear(p, rng);
}

std::vector<double> weighted_sup(const Trajectory& traj, const Grid& grid, double w) {
  Vector weight = grid.dist.array().pow(w);
  std::vector<double> out(traj.fields.cols());
  for (int s = 0; s < traj.fields.cols(); ++s)
    out[s] = (weight.array() * traj.fields.col(s).array().abs()).maxCoeff();
  return out;
}

std::optional<double> blowup_stopping_time(const Trajectory& traj, const Grid& grid, double R,
                                           const WeightExponent& e) {
  auto sup = weighted_sup(traj, grid, e.value());
  for (size_t s = 0; s < sup.size(); ++s)
    if (sup[s] > R) return traj.times[s];
  return std::nullopt;
}

double cascade_constant(const Grid& grid, const WeightExponent& e) {
  return grid.dist.array().pow(-e.value()).maxCoeff();
}

std::vector<CascadeLevel> truncation_cascade(const Problem& prob, const Superlinear& sl,
                                             const std::vector<double>& levels,
                                             const WeightExponent& e, std::uint64_t master_seed,
                                             std::uint64_t path_id) {
  require(!levels.empty(), "truncation_cascade: no levels");
  for (size_t k = 1; k < levels.size(); ++k)
    require(levels[k] > levels[k - 1], "truncation_cascade: levels must increase");
  require(prob.u0.minCoeff() >= 0, "truncation_cascade: u0 must be nonnegative");
  const double c0 = cascade_constant(prob.grid, e);
  Stepper stepper(prob);
  std::vector<CascadeLevel> out;
  for (double m : levels) {
    Problem p = prob;
    p.amplitude = truncated_amplitude(sl, m);
    RngStream rng(master_seed, path_id);  // one noise realization for every level
    CascadeLevel lv;
    lv.m = m;
    lv.traj = solve_semilinear(p, stepper, rng);
    lv.tau = blowup_stopping_time(lv.traj, prob.grid, m / c0, e);
    lv.traj.stopping_time = lv.tau;
    out.push_back(std::move(lv));
  }
  return out;
}

double stable_1d(double alpha, RngStream& rng) {
  const double V = pi * (rng.uniform() - 0.5);
  if (alpha == 1.0) return std::tan(V);
  const double W = -std::log(rng.uniform());
  return std::sin(alpha * V) / std::pow(std::cos(V), 1 / alpha) *
         std::pow(std::cos((1 - alpha) * V) / W, (1 - alpha) / alpha);
}

double positive_stable(double a, RngStream& rng) {
  require(a > 0 && a < 1, "positive_stable: 0 < a < 1");
  const double U = pi * rng.uniform();
  const double W = -std::log(rng.uniform());
  return std::sin(a * U) / std::pow(std::sin(U), 1 / a) * std::pow(std::sin((1 - a) * U) / W, (1 - a) / a);
}

Point stable_increment(double alpha, int d, double dt, RngStream& rng) {
  require(alpha > 0 && alpha < 2, "stable_increment: alpha in (0, 2)");
  const double sc = std::pow(dt, 1 / alpha);
  if (d == 1) return point1(sc * stable_1d(alpha, rng));
  // sub-Gaussian: sqrt(A) G with G ~ N(0, 2I)
  const double r = sc * std::sqrt(2 * positive_stable(0.5 * alpha, rng));
  const double g1 = rng.normal(), g2 = rng.normal();
  return point2(r * g1, r * g2);
}

namespace {

constexpr long kChunk = 2048;

struct Moments {
  double sum = 0.0, sq = 0.0;
};

// path -> sample; chunked so the sum does not depend on the thread count
template <typename F>
McEstimate mc_reduce(long n_paths, F&& sample) {
  require(n_paths >= 2, "monte carlo: need at least two paths");
  const long chunks = (n_paths + kChunk - 1) / kChunk;
  std::vector<Moments> part(chunks);
  parallel_chunks(chunks, [&](long c) {
    Moments m;
    for (long p = c * kChunk; p < std::min(n_paths, (c + 1) * kChunk); ++p) {
      double y = sample(p);
      m.sum += y;
      m.sq += y * y;
    }
    part[c] = m;
  });
  Moments tot;
  for (const auto& m : part) tot.sum += m.sum, tot.sq += m.sq;
  McEstimate e;
  e.paths = n_paths;
  e.mean = tot.sum / n_paths;
  const double var = std::max(0.0, (tot.sq - n_paths * e.mean * e.mean) / (n_paths - 1));
  e.se = std::sqrt(var / n_paths);
  return e;
}

bool inside(const DomainSpec& dom, const Point& x) { return distance(dom, x) > 0; }

}  // namespace

McEstimate killed_semigroup_mc(double alpha, const DomainSpec& dom, const SpaceFn& f, double t,
                               const Point& x, long n_paths, const McOptions& opt) {
  require(t >= 0 && opt.dt > 0, "killed_semigroup_mc: t >= 0 and dt > 0");
  require(x.size() == dom.dim(), "killed_semigroup_mc: point dimension");
  const long K = t == 0 ? 0 : static_cast<long>(std::ceil(t / opt.dt - 1e-9));
  const double h = K ? t / K : 0.0;
  const int d = dom.dim();
  return mc_reduce(n_paths, [&](long p) {
    if (!inside(dom, x)) return 0.0;
    RngStream rng(opt.master_seed, static_cast<std::uint64_t>(p));
    Point X = x;
    for (long k = 0; k < K; ++k) {
      X += stable_increment(alpha, d, h, rng);
      if (!inside(dom, X)) return 0.0;
    }
    return f(X);
  });
}

McEstimate duhamel_reference(double alpha, const DomainSpec& dom, const SpaceTimeFn& f, double t,
                             const Point& x, long n_paths, const McOptions& opt) {
  require(t >= 0 && opt.dt > 0, "duhamel_reference: t >= 0 and dt > 0");
  const long K = t == 0 ? 0 : static_cast<long>(std::ceil(t / opt.dt - 1e-9));
  const double h = K ? t / K : 0.0;
  const int d = dom.dim();
  return mc_reduce(n_paths, [&](long p) {
    if (!inside(dom, x) || K == 0) return 0.0;
    RngStream rng(opt.master_seed, static_cast<std::uint64_t>(p));
    Point X = x;
    // r is the age of the path; the source is sampled at time t - r
    double acc = 0.5 * h * f(t, X);
    for (long k = 1; k <= K; ++k) {
      X += stable_increment(alpha, d, h, rng);
      if (!inside(dom, X)) return acc;
      acc += (k == K ? 0.5 : 1.0) * h * f(t - k * h, X);
    }
    return acc;
  });
}

}  // namespace nlspde
