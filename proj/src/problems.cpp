#include "tvopt/problems.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "tvopt/errors.hpp"
#include "tvopt/rng.hpp"

namespace tvopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double param(const ScenarioConfig& cfg, const std::string& key, double fallback) {
    auto it = cfg.params.find(key);
    return it == cfg.params.end() ? fallback : it->second;
}

long iparam(const ScenarioConfig& cfg, const std::string& key, long fallback) {
    const double v = param(cfg, key, static_cast<double>(fallback));
    const long r = std::lround(v);
    if (std::abs(v - static_cast<double>(r)) > 1e-9)
        throw config_error("parameter '" + key + "' must be an integer");
    return r;
}

Vec normal_vec(std::mt19937_64& eng, Eigen::Index n) {
    std::normal_distribution<double> d(0.0, 1.0);
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = d(eng);
    return v;
}

Vec uniform_vec(std::mt19937_64& eng, Eigen::Index n, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = d(eng);
    return v;
}

Mat normal_mat(std::mt19937_64& eng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> d(0.0, 1.0);
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = d(eng);
    return m;
}

// Eigenvalues spread linearly over [m, M]: exact curvature constants.
Mat spread_diag(Eigen::Index n, double m, double M) {
    Mat Q = Mat::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        Q(i, i) = n == 1 ? M : m + (M - m) * static_cast<double>(i) / static_cast<double>(n - 1);
    return Q;
}

// Full-rank random matrix: redraw (deterministically) until sigma_min is a
// healthy fraction of sigma_max.
Mat well_conditioned(std::uint64_t seed, std::uint64_t stream, Eigen::Index rows, Eigen::Index cols,
                     double min_ratio) {
    for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
        auto eng = substream(seed, stream + 1000 * attempt);
        Mat A = normal_mat(eng, rows, cols);
        Eigen::JacobiSVD<Mat> svd(A);
        if (svd.singularValues()(svd.singularValues().size() - 1) >=
            min_ratio * svd.singularValues()(0))
            return A;
    }
    throw config_error("failed to draw a well-conditioned matrix");
}

void require_positive(double v, const std::string& key) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw config_error("parameter '" + key + "' must be positive");
}

ProblemStream base_stream(const ScenarioConfig& cfg) {
    ProblemStream s;
    s.horizon = cfg.horizon;
    s.seed = cfg.seed;
    s.h = param(cfg, "h", 1.0);
    s.scenario = cfg.family;
    s.X_bound = kInf;
    if (s.horizon < 1) throw config_error("horizon must be at least 1");
    require_positive(s.h, "h");
    return s;
}

ProblemStream make_static_quadratic(const ScenarioConfig& cfg) {
    const long n = iparam(cfg, "n", 10);
    const double m = param(cfg, "m", 1.0);
    const double M = param(cfg, "M", 2.0);
    if (n < 1) throw config_error("n must be at least 1");
    if (!(0.0 < m && m <= M)) throw config_error("need 0 < m <= M");

    ProblemStream s = base_stream(cfg);
    Mat Q = spread_diag(n, m, M);
    auto eng = substream(cfg.seed, 1);
    Vec center = normal_vec(eng, n);
    const double h = s.h;
    s.sampler = [Q, center, h](long k) {
        ProblemInstance inst;
        inst.f = ConvexFunction::quadratic_centered(Q, center);
        inst.feasible_set = ConvexSet::whole(center.size());
        inst.t_k = h * static_cast<double>(k);
        return inst;
    };
    s.algorithm = "projected_gradient";
    s.lambda_default = 1.0 / M;
    s.x1 = Vec::Zero(n);
    return s;
}

ProblemStream make_moving_quadratic(const ScenarioConfig& cfg) {
    const long n = iparam(cfg, "n", 2);
    const double m = param(cfg, "m", 1.0);
    const double M = param(cfg, "M", 2.0);
    const double drift = param(cfg, "drift", 0.01);
    const double decay = param(cfg, "drift_decay", 1.0);
    if (n < 1) throw config_error("n must be at least 1");
    if (!(0.0 < m && m <= M)) throw config_error("need 0 < m <= M");
    if (drift < 0.0) throw config_error("drift must be nonnegative");
    if (!(decay > 0.0 && decay <= 1.0)) throw config_error("drift_decay must lie in (0, 1]");

    ProblemStream s = base_stream(cfg);
    Mat Q = spread_diag(n, m, M);
    auto eng = substream(cfg.seed, 1);
    Vec c1 = normal_vec(eng, n);
    // Drift along the minimal-curvature eigendirection: the tracking floor
    // delta/(lambda*m) is then met with equality in the limit.
    Vec u = Vec::Zero(n);
    u[0] = 1.0;
    const double h = s.h;
    s.sampler = [Q, c1, u, drift, decay, h](long k) {
        // ||c_k - c_{k-1}|| = drift * decay^(k-2): exact path variation.
        const double steps = decay == 1.0
                                 ? static_cast<double>(k - 1)
                                 : (1.0 - std::pow(decay, static_cast<double>(k - 1))) / (1.0 - decay);
        Vec center = c1 + drift * steps * u;
        ProblemInstance inst;
        inst.f = ConvexFunction::quadratic_centered(Q, center);
        inst.feasible_set = ConvexSet::whole(center.size());
        inst.t_k = h * static_cast<double>(k);
        return inst;
    };
    s.algorithm = "projected_gradient";
    s.lambda_default = 1.0 / M;
    s.x1 = c1;
    s.meta["drift"] = drift;
    s.meta["drift_decay"] = decay;
    return s;
}

ProblemStream make_tv_lasso(const ScenarioConfig& cfg) {
    const long n = iparam(cfg, "n", 8);
    const long rows = iparam(cfg, "rows", 12);
    const double weight = param(cfg, "weight", 0.1);
    const double drift = param(cfg, "drift", 0.002);
    const double box_half = param(cfg, "box_half", 2.0);
    const double noise = param(cfg, "noise", 0.05);
    if (n < 1 || rows < n) throw config_error("need rows >= n >= 1");
    require_positive(weight, "weight");
    require_positive(box_half, "box_half");
    if (drift < 0.0 || noise < 0.0) throw config_error("drift and noise must be nonnegative");

    ProblemStream s = base_stream(cfg);
    Mat A = well_conditioned(cfg.seed, 1, rows, n, 0.25);
    Vec s0 = Vec::Zero(n);
    s0[0] = 1.0;
    if (n > 1) s0[1] = -0.7;
    if (n > 2) s0[2] = 0.5;
    auto eng2 = substream(cfg.seed, 2);
    Vec e = noise * normal_vec(eng2, rows);
    auto eng3 = substream(cfg.seed, 3);
    Vec ub = normal_vec(eng3, rows).normalized();
    Vec b_base = A * s0 + e;
    const double h = s.h;
    s.sampler = [A, b_base, ub, drift, weight, box_half, n, h](long k) {
        Vec b = b_base + drift * static_cast<double>(k - 1) * ub;
        ProblemInstance inst;
        inst.f = ConvexFunction::least_squares(A, b);
        inst.g = ConvexFunction::l1(n, weight);
        inst.feasible_set = ConvexSet::centered_box(n, box_half);
        inst.t_k = h * static_cast<double>(k);
        return inst;
    };
    s.algorithm = "forward_backward";
    Eigen::JacobiSVD<Mat> svd(A);
    const double M = svd.singularValues()(0) * svd.singularValues()(0);
    s.lambda_default = 1.0 / M;
    s.x1 = Vec::Zero(n);
    s.X_bound = box_half * std::sqrt(static_cast<double>(n));
    return s;
}

ProblemStream make_tv_inequality_qp(const ScenarioConfig& cfg) {
    const long n = iparam(cfg, "n", 3);
    const long mc = iparam(cfg, "mcon", 2);
    const double m = param(cfg, "m", 1.0);
    const double M = param(cfg, "M", 2.0);
    const double drift = param(cfg, "drift", 0.005);
    const double margin = param(cfg, "margin", 0.5);
    if (n < 1 || mc < 1) throw config_error("need n >= 1 and mcon >= 1");
    if (!(0.0 < m && m <= M)) throw config_error("need 0 < m <= M");
    require_positive(margin, "margin");
    if (drift < 0.0) throw config_error("drift must be nonnegative");

    ProblemStream s = base_stream(cfg);
    Mat Q = spread_diag(n, m, M);
    auto eng = substream(cfg.seed, 1);
    Mat A(mc, n);
    for (long i = 0; i < mc; ++i) A.row(i) = normal_vec(eng, n).normalized().transpose();
    // Slater point at the origin with uniform margin; centers start beyond the
    // first constraint so the optimum keeps it active.
    Vec b = Vec::Constant(mc, margin);
    Vec c1 = 1.5 * A.row(0).transpose();
    auto eng2 = substream(cfg.seed, 2);
    Vec uc = normal_vec(eng2, n).normalized();
    const double h = s.h;
    s.sampler = [Q, A, b, c1, uc, drift, n, h](long k) {
        Vec center = c1 + drift * static_cast<double>(k - 1) * uc;
        ProblemInstance inst;
        inst.f = ConvexFunction::quadratic_centered(Q, center);
        inst.feasible_set = ConvexSet::whole(n);
        inst.linear_ineq = LinearConstraint{A, b};
        inst.slater_point = Vec::Zero(n);
        inst.t_k = h * static_cast<double>(k);
        return inst;
    };
    s.algorithm = "dual_ascent_ineq";
    Eigen::JacobiSVD<Mat> svd(A);
    const double smax = svd.singularValues()(0);
    s.lambda_default = m / (smax * smax);
    s.x1 = Vec::Zero(n);
    s.p1 = Vec::Zero(mc);
    s.meta["gamma"] = margin;
    return s;
}

ProblemStream make_tv_equality_qp(const ScenarioConfig& cfg) {
    const long n = iparam(cfg, "n", 4);
    const long rc = iparam(cfg, "rcon", 2);
    const double m = param(cfg, "m", 1.0);
    const double M = param(cfg, "M", 2.0);
    const double drift = param(cfg, "drift", 0.0);
    const bool rank_deficient = iparam(cfg, "rank_deficient", 0) != 0;
    if (n < 1 || rc < 1 || rc > n) throw config_error("need 1 <= rcon <= n");
    if (!(0.0 < m && m <= M)) throw config_error("need 0 < m <= M");
    if (drift < 0.0) throw config_error("drift must be nonnegative");

    ProblemStream s = base_stream(cfg);
    Mat Q = spread_diag(n, m, M);
    Mat A = well_conditioned(cfg.seed, 1, rc, n, 0.25);
    if (rank_deficient && rc >= 2) A.row(rc - 1) = A.row(0);  // sigma_min = 0, sigma_0 > 0
    auto eng2 = substream(cfg.seed, 2);
    Vec xf = normal_vec(eng2, n);
    Vec b = A * xf;  // consistent by construction
    auto eng3 = substream(cfg.seed, 3);
    Vec c1 = normal_vec(eng3, n);
    auto eng4 = substream(cfg.seed, 4);
    Vec uc = normal_vec(eng4, n).normalized();
    const double h = s.h;
    s.sampler = [Q, A, b, c1, uc, drift, n, h](long k) {
        Vec center = c1 + drift * static_cast<double>(k - 1) * uc;
        ProblemInstance inst;
        inst.f = ConvexFunction::quadratic_centered(Q, center);
        inst.feasible_set = ConvexSet::whole(n);
        inst.linear_eq = LinearConstraint{A, b};
        inst.t_k = h * static_cast<double>(k);
        return inst;
    };
    s.algorithm = "dual_ascent_eq";
    Eigen::JacobiSVD<Mat> svd(A);
    const double smax = svd.singularValues()(0);
    s.lambda_default = m / (smax * smax);
    s.x1 = Vec::Zero(n);
    s.p1 = Vec::Zero(rc);
    return s;
}

ProblemStream make_tv_admm_consensus(const ScenarioConfig& cfg) {
    const long n = iparam(cfg, "n", 3);
    const double m = param(cfg, "m", 1.0);
    const double M = param(cfg, "M", 2.0);
    const double drift = param(cfg, "drift", 0.005);
    if (n < 1) throw config_error("n must be at least 1");
    if (!(0.0 < m && m <= M)) throw config_error("need 0 < m <= M");
    if (drift < 0.0) throw config_error("drift must be nonnegative");

    ProblemStream s = base_stream(cfg);
    Mat Qf = spread_diag(n, m, M);
    Mat Qg = Mat::Zero(n, n);
    for (long i = 0; i < n; ++i) Qg(i, i) = Qf(n - 1 - i, n - 1 - i);
    auto eng1 = substream(cfg.seed, 1);
    Vec cf1 = normal_vec(eng1, n);
    auto eng2 = substream(cfg.seed, 2);
    Vec cg1 = normal_vec(eng2, n);
    auto eng3 = substream(cfg.seed, 3);
    Vec u = normal_vec(eng3, n).normalized();
    const double h = s.h;
    s.sampler = [Qf, Qg, cf1, cg1, u, drift, n, h](long k) {
        const double t = drift * static_cast<double>(k - 1);
        ProblemInstance inst;
        inst.f = ConvexFunction::quadratic_centered(Qf, cf1 + t * u);
        inst.g = ConvexFunction::quadratic_centered(Qg, cg1 - t * u);
        inst.feasible_set = ConvexSet::whole(n);
        inst.admm = AdmmTriple{Mat::Identity(n, n), -Mat::Identity(n, n), Vec::Zero(n)};
        inst.t_k = h * static_cast<double>(k);
        return inst;
    };
    s.algorithm = "admm";
    s.lambda_default = 1.0;
    s.x1 = Vec::Zero(n);
    s.p1 = Vec::Zero(n);
    return s;
}

Mat rotation2(double theta) {
    Mat R(2, 2);
    R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return R;
}

ProblemStream make_localization_lite(const ScenarioConfig& cfg) {
    const long N = iparam(cfg, "nodes", 8);
    const long NA = iparam(cfg, "anchors", 5);
    const double sigma = param(cfg, "noise", 0.1);
    const double omega = param(cfg, "omega", 0.0);
    const double mu = param(cfg, "mu", 0.01);
    const double box_half = param(cfg, "box_half", 0.5);
    const long max_degree = iparam(cfg, "max_degree", 3);
    if (N < 2 || NA < 2) throw config_error("need at least 2 nodes and 2 anchors");
    if (sigma < 0.0) throw config_error("noise must be nonnegative");
    require_positive(mu, "mu");
    require_positive(box_half, "box_half");
    if (max_degree < 1) throw config_error("max_degree must be at least 1");

    ProblemStream s = base_stream(cfg);
    auto eng_n = substream(cfg.seed, 1);
    auto eng_a = substream(cfg.seed, 2);
    std::vector<Vec> y0(N), a0(NA);
    for (long i = 0; i < N; ++i) y0[i] = uniform_vec(eng_n, 2, -box_half, box_half);
    for (long j = 0; j < NA; ++j) a0[j] = uniform_vec(eng_a, 2, -box_half, box_half);

    // Anchor links: two nearest anchors per node, swapping the second for a
    // farther one when the two directions are nearly collinear (a node with
    // collinear anchors is poorly observable and would crater the curvature).
    std::vector<std::pair<long, long>> anchor_edges;  // (node, anchor)
    for (long i = 0; i < N; ++i) {
        std::vector<long> order(NA);
        for (long j = 0; j < NA; ++j) order[j] = j;
        std::sort(order.begin(), order.end(), [&](long a, long b) {
            const double da = (y0[i] - a0[a]).norm();
            const double db = (y0[i] - a0[b]).norm();
            if (da != db) return da < db;
            return a < b;
        });
        const long first = order[0];
        long second = order[1];
        Vec u1 = (y0[i] - a0[first]).normalized();
        double best_sin = std::abs(u1[0] * (y0[i] - a0[second]).normalized()[1] -
                                   u1[1] * (y0[i] - a0[second]).normalized()[0]);
        for (long idx = 2; idx < NA && best_sin < 0.25; ++idx) {
            Vec u2 = (y0[i] - a0[order[idx]]).normalized();
            const double sn = std::abs(u1[0] * u2[1] - u1[1] * u2[0]);
            if (sn > best_sin) {
                best_sin = sn;
                second = order[idx];
            }
        }
        anchor_edges.emplace_back(i, first);
        anchor_edges.emplace_back(i, second);
    }

    // Node-node edges: shortest pairs first, capped degree.
    std::vector<std::tuple<double, long, long>> pairs;
    for (long i = 0; i < N; ++i)
        for (long j = i + 1; j < N; ++j) pairs.emplace_back((y0[i] - y0[j]).norm(), i, j);
    std::sort(pairs.begin(), pairs.end());
    std::vector<long> degree(N, 0);
    std::vector<std::pair<long, long>> node_edges;
    for (const auto& [d, i, j] : pairs) {
        if (degree[i] < max_degree && degree[j] < max_degree) {
            node_edges.emplace_back(i, j);
            ++degree[i];
            ++degree[j];
        }
    }

    // Frozen range measurements: rigid rotation keeps true distances constant,
    // so one noise draw per edge makes omega = 0 a genuinely static problem.
    std::vector<double> anchor_range(anchor_edges.size()), node_range(node_edges.size());
    for (std::size_t e = 0; e < anchor_edges.size(); ++e) {
        const auto [i, j] = anchor_edges[e];
        anchor_range[e] = std::max(0.01, (y0[i] - a0[j]).norm() + sigma * frozen_normal(cfg.seed, 3, e));
    }
    for (std::size_t e = 0; e < node_edges.size(); ++e) {
        const auto [i, j] = node_edges[e];
        node_range[e] = std::max(0.01, (y0[i] - y0[j]).norm() + sigma * frozen_normal(cfg.seed, 4, e));
    }

    // Curvature floor on the anchor part: below it the consensus iteration's
    // slowest mode would not settle within the experiment horizon.
    double mu_eff = mu;
    {
        Mat E = Mat::Zero(static_cast<long>(anchor_edges.size()), 2 * N);
        for (std::size_t e = 0; e < anchor_edges.size(); ++e) {
            const auto [i, j] = anchor_edges[e];
            E.block(static_cast<long>(e), 2 * i, 1, 2) = (y0[i] - a0[j]).normalized().transpose();
        }
        Eigen::SelfAdjointEigenSolver<Mat> es(Mat(E.transpose() * E), Eigen::EigenvaluesOnly);
        const double lmin = es.eigenvalues().minCoeff() + mu;
        if (lmin < 0.15) mu_eff = mu + (0.15 - lmin);
    }

    const double h = s.h;
    s.sampler = [y0, a0, anchor_edges, node_edges, anchor_range, node_range, omega, mu_eff, N,
                 h](long k) {
        const Mat R = rotation2(omega * h * static_cast<double>(k - 1));
        std::vector<Vec> y(N), a(a0.size());
        for (long i = 0; i < N; ++i) y[i] = R * y0[i];
        for (std::size_t j = 0; j < a0.size(); ++j) a[j] = R * a0[j];

        // Anchor part: linearized range residuals at the true positions, plus
        // a small Tikhonov term; block structure is node-local.
        Mat Ea = Mat::Zero(static_cast<long>(anchor_edges.size()), 2 * N);
        Vec ra(static_cast<long>(anchor_edges.size()));
        for (std::size_t e = 0; e < anchor_edges.size(); ++e) {
            const auto [i, j] = anchor_edges[e];
            Vec u = (y[i] - a[j]).normalized();
            Ea.block(static_cast<long>(e), 2 * i, 1, 2) = u.transpose();
            ra[static_cast<long>(e)] = anchor_range[e] + u.dot(a[j]);
        }
        Mat Qf = Ea.transpose() * Ea;
        Qf.diagonal().array() += mu_eff;
        Qf = 0.5 * (Qf + Qf.transpose().eval());
        Vec qf = -(Ea.transpose() * ra);

        // Edge part: the coupling least squares that consensus shares.
        Mat En = Mat::Zero(static_cast<long>(node_edges.size()), 2 * N);
        Vec rn(static_cast<long>(node_edges.size()));
        for (std::size_t e = 0; e < node_edges.size(); ++e) {
            const auto [i, j] = node_edges[e];
            Vec u = (y[i] - y[j]).normalized();
            En.block(static_cast<long>(e), 2 * i, 1, 2) = u.transpose();
            En.block(static_cast<long>(e), 2 * j, 1, 2) = -u.transpose();
            rn[static_cast<long>(e)] = node_range[e];
        }
        Mat Qg = En.transpose() * En;
        Qg = 0.5 * (Qg + Qg.transpose().eval());
        Vec qg = -(En.transpose() * rn);

        ProblemInstance inst;
        inst.f = ConvexFunction::quadratic(Qf, qf, 0.5 * ra.squaredNorm());
        inst.g = ConvexFunction::quadratic(Qg, qg, 0.5 * rn.squaredNorm());
        inst.feasible_set = ConvexSet::whole(2 * N);
        inst.admm = AdmmTriple{Mat::Identity(2 * N, 2 * N), -Mat::Identity(2 * N, 2 * N),
                               Vec::Zero(2 * N)};
        inst.t_k = h * static_cast<double>(k);
        return inst;
    };
    s.algorithm = "admm";
    s.lambda_default = 0.3;
    s.x1 = Vec::Zero(2 * N);
    s.p1 = Vec::Zero(2 * N);
    s.squared_sum_tracking = true;
    s.meta["omega"] = omega;
    s.meta["nodes"] = static_cast<double>(N);
    s.meta["anchors"] = static_cast<double>(NA);
    s.meta["box_half"] = box_half;
    for (long i = 0; i < N; ++i) {
        s.meta["node" + std::to_string(i) + "_x"] = y0[i][0];
        s.meta["node" + std::to_string(i) + "_y"] = y0[i][1];
    }
    for (long j = 0; j < NA; ++j) {
        s.meta["anchor" + std::to_string(j) + "_x"] = a0[j][0];
        s.meta["anchor" + std::to_string(j) + "_y"] = a0[j][1];
    }
    return s;
}

}  // namespace

ProblemInstance sample(const ProblemStream& stream, long k) {
    if (!stream.sampler) throw parameter_error("sample: stream has no sampler");
    if (k < 1 || k > stream.horizon + 1)
        throw parameter_error("sample: k out of range 1..horizon+1");
    return stream.sampler(k);
}

ProblemStream make_scenario(const ScenarioConfig& config) {
    static const std::map<std::string, std::vector<std::string>> kFamilyKeys = {
        {"static_quadratic", {"n", "m", "M"}},
        {"moving_quadratic", {"n", "m", "M", "drift", "drift_decay"}},
        {"tv_lasso", {"n", "rows", "weight", "drift", "box_half", "noise"}},
        {"tv_inequality_qp", {"n", "mcon", "m", "M", "drift", "margin"}},
        {"tv_equality_qp", {"n", "rcon", "m", "M", "drift", "rank_deficient"}},
        {"tv_admm_consensus", {"n", "m", "M", "drift"}},
        {"localization_lite",
         {"nodes", "anchors", "noise", "omega", "mu", "box_half", "max_degree"}},
    };
    const auto it = kFamilyKeys.find(config.family);
    if (it == kFamilyKeys.end())
        throw config_error("unknown scenario family '" + config.family + "'");
    for (const auto& [key, value] : config.params) {
        (void)value;
        if (key != "h" &&
            std::find(it->second.begin(), it->second.end(), key) == it->second.end())
            throw config_error("unknown parameter '" + key + "' for family '" + config.family +
                               "'");
    }

    if (config.family == "static_quadratic") return make_static_quadratic(config);
    if (config.family == "moving_quadratic") return make_moving_quadratic(config);
    if (config.family == "tv_lasso") return make_tv_lasso(config);
    if (config.family == "tv_inequality_qp") return make_tv_inequality_qp(config);
    if (config.family == "tv_equality_qp") return make_tv_equality_qp(config);
    if (config.family == "tv_admm_consensus") return make_tv_admm_consensus(config);
    return make_localization_lite(config);
}

VariationEstimate estimate_variation(const ProblemStream& stream,
                                     const std::vector<Vec>& oracle_traj,
                                     const std::vector<Vec>* run_iterates) {
    if (oracle_traj.size() < 2)
        throw parameter_error("estimate_variation: need at least two oracle solutions");
    const std::size_t K = oracle_traj.size();

    VariationEstimate est;
    for (std::size_t t = 1; t < K; ++t) {
        est.delta_steps.push_back((oracle_traj[t] - oracle_traj[t - 1]).norm());
        est.delta_hat = std::max(est.delta_hat, est.delta_steps.back());
    }

    if (run_iterates != nullptr) {
        if (run_iterates->size() < K)
            throw parameter_error("estimate_variation: run shorter than oracle trajectory");
        for (std::size_t t = 0; t + 1 < K; ++t) {
            const Vec& x_next = (*run_iterates)[t + 1];
            const double gap =
                (x_next - oracle_traj[t + 1]).squaredNorm() - (x_next - oracle_traj[t]).squaredNorm();
            est.d_sq_steps.push_back(std::max(0.0, gap));
            est.d_hat = std::max(est.d_hat, est.d_sq_steps.back());
        }
        est.d_hat = std::sqrt(est.d_hat);
    }

    // sigma: largest sampled objective change between consecutive instances,
    // probed at the optimizers and the run iterates that are feasible for both.
    std::vector<Vec> probes = oracle_traj;
    if (run_iterates != nullptr)
        probes.insert(probes.end(), run_iterates->begin(), run_iterates->end());
    ProblemInstance prev = sample(stream, 1);
    for (std::size_t t = 1; t < K; ++t) {
        ProblemInstance cur = sample(stream, static_cast<long>(t + 1));
        double worst = 0.0;
        for (const Vec& x : probes) {
            if (x.size() != prev.f.dimension) continue;
            double fp = eval(prev.f, x);
            double fc = eval(cur.f, x);
            if (prev.g) fp += eval(*prev.g, x);
            if (cur.g) fc += eval(*cur.g, x);
            if (!std::isfinite(fp) || !std::isfinite(fc)) continue;
            worst = std::max(worst, std::abs(fc - fp));
        }
        est.sigma_steps.push_back(worst);
        est.sigma_hat = std::max(est.sigma_hat, worst);
        prev = std::move(cur);
    }
    return est;
}

}  // namespace tvopt
