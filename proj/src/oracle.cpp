#include "rcr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace rcr {

Eigen::MatrixXd build_hamiltonian(const ModelParams& p) {
    const int nsites = p.n_sites();
    if (nsites > 12) throw std::invalid_argument("oracle: N^d exceeds the dimension cap (12)");
    const int dim = 1 << nsites;
    Eigen::MatrixXd mH = Eigen::MatrixXd::Zero(dim, dim);  // -H, then negated

    auto zspin = [](int state, int site) { return (state >> site) & 1 ? -1.0 : 1.0; };

    const auto es = edges(p);
    for (int s = 0; s < dim; ++s) {
        double diag = 0.0;
        for (const auto& e : es) {
            const int ia = site_index(e.a, p), ib = site_index(e.b, p);
            diag += p.rho * e.coupling * zspin(s, ia) * zspin(s, ib);
        }
        for (int i = 0; i < nsites; ++i) diag += p.h * zspin(s, i);
        diag += p.lambda * nsites * 0.5;  // identity part of (I + sigma^x)/2
        mH(s, s) += diag;
        for (int i = 0; i < nsites; ++i) mH(s ^ (1 << i), s) += p.lambda * 0.5;
    }
    return -mH;
}

OracleSystem::OracleSystem(const ModelParams& p) : params_(p) {
    const Eigen::MatrixXd H = build_hamiltonian(p);
    dim_ = (int)H.rows();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("oracle: eigendecomposition failed");
    e_min_ = solver.eigenvalues().minCoeff();
    energies_ = solver.eigenvalues().array() - e_min_;
    vecs_ = solver.eigenvectors();
    const int nsites = p.n_sites();
    cache_sz_.resize(nsites);
    cache_sigx_.resize(nsites);
    have_sz_.assign(nsites, 0);
    have_sigx_.assign(nsites, 0);
}

const Eigen::MatrixXd& OracleSystem::op_in_eigenbasis(OpKind k, int site) const {
    auto& cache = (k == OpKind::sz) ? cache_sz_ : cache_sigx_;
    auto& have = (k == OpKind::sz) ? have_sz_ : have_sigx_;
    if (!have[site]) {
        if (k == OpKind::sz) {
            Eigen::VectorXd d(dim_);
            for (int s = 0; s < dim_; ++s) d(s) = (s >> site) & 1 ? -1.0 : 1.0;
            cache[site] = vecs_.transpose() * d.asDiagonal() * vecs_;
        } else {
            // (I + sigma^x_site)/2: identity plus the bit-flip permutation.
            Eigen::MatrixXd pv(dim_, dim_);
            for (int s = 0; s < dim_; ++s) pv.row(s) = vecs_.row(s ^ (1 << site));
            cache[site] = 0.5 * (Eigen::MatrixXd::Identity(dim_, dim_) + vecs_.transpose() * pv);
        }
        have[site] = 1;
    }
    return cache[site];
}

double OracleSystem::log_partition_function() const {
    const double beta = params_.beta;
    double z = 0.0;
    for (int m = 0; m < dim_; ++m) z += std::exp(-beta * energies_(m));
    // The coupling part of the prefactor carries the Hamiltonian's 1/2:
    // rho * Jbar / 2 per site equals rho * J_e summed over unordered
    // edges, which is what makes the flip-process representation of the
    // partition function exact.
    const double norm = -params_.n_sites() * beta *
                        (0.5 * params_.rho * jbar(params_) + params_.h + params_.lambda);
    return norm + std::log(z) - beta * e_min_;
}

double OracleSystem::partition_function() const { return std::exp(log_partition_function()); }

double OracleSystem::ordered_correlation(const std::vector<Insertion>& ins) const {
    const double beta = params_.beta;
    for (std::size_t k = 0; k + 1 < ins.size(); ++k) {
        if (ins[k].at.time > ins[k + 1].at.time)
            throw std::invalid_argument("ordered_correlation: insertion times must be sorted");
    }
    for (const auto& i : ins) {
        if (!(i.at.time >= 0.0 && i.at.time < beta))
            throw std::invalid_argument("ordered_correlation: time outside [0, beta)");
    }
    Eigen::VectorXd gibbs(dim_);
    for (int m = 0; m < dim_; ++m) gibbs(m) = std::exp(-beta * energies_(m));
    const double z = gibbs.sum();
    if (ins.empty()) return 1.0;

    auto wvec = [&](double tau) {
        Eigen::VectorXd w(dim_);
        for (int m = 0; m < dim_; ++m) w(m) = std::exp(-tau * energies_(m));
        return w;
    };

    if (ins.size() == 1) {
        const auto& A = op_in_eigenbasis(ins[0].kind, site_index(ins[0].at.site, params_));
        double tr = 0.0;
        for (int m = 0; m < dim_; ++m) tr += gibbs(m) * A(m, m);
        return tr / z;
    }
    if (ins.size() == 2) {
        const auto& A1 = op_in_eigenbasis(ins[0].kind, site_index(ins[0].at.site, params_));
        const auto& A2 = op_in_eigenbasis(ins[1].kind, site_index(ins[1].at.site, params_));
        const Eigen::VectorXd wout = wvec(beta - ins[1].at.time + ins[0].at.time);
        const Eigen::VectorXd wmid = wvec(ins[1].at.time - ins[0].at.time);
        double tr = 0.0;
        for (int m = 0; m < dim_; ++m) {
            double row = 0.0;
            for (int n = 0; n < dim_; ++n) row += A2(m, n) * wmid(n) * A1(n, m);
            tr += wout(m) * row;
        }
        return tr / z;
    }

    // General case: accumulate matrices right to left.
    const auto& first = op_in_eigenbasis(ins[0].kind, site_index(ins[0].at.site, params_));
    Eigen::MatrixXd M = first * wvec(ins[0].at.time).asDiagonal();
    for (std::size_t j = 1; j < ins.size(); ++j) {
        const auto& Aj = op_in_eigenbasis(ins[j].kind, site_index(ins[j].at.site, params_));
        const Eigen::VectorXd gap = wvec(ins[j].at.time - ins[j - 1].at.time);
        M = Aj * (gap.asDiagonal() * M);
    }
    const Eigen::VectorXd wout = wvec(beta - ins.back().at.time);
    double tr = 0.0;
    for (int m = 0; m < dim_; ++m) tr += wout(m) * M(m, m);
    return tr / z;
}

double OracleSystem::magnetization() const {
    return ordered_correlation({{OpKind::sz, {site_from_index(0, params_), 0.0}}});
}

double OracleSystem::truncated(OpKind a, const Point& u, OpKind b, const Point& v) const {
    std::vector<Insertion> two;
    if (u.time <= v.time) {
        two = {{a, u}, {b, v}};
    } else {
        two = {{b, v}, {a, u}};
    }
    const double joint = ordered_correlation(two);
    const double ma = ordered_correlation({{a, u}});
    const double mb = ordered_correlation({{b, v}});
    return joint - ma * mb;
}

double partition_function(const ModelParams& p) { return OracleSystem(p).partition_function(); }

double magnetization(const ModelParams& p) { return OracleSystem(p).magnetization(); }

double ordered_correlation(const ModelParams& p, const std::vector<Insertion>& ins) {
    return OracleSystem(p).ordered_correlation(ins);
}

double truncated(const ModelParams& p, TruncKind kind, const Point& u, const Point& v) {
    OracleSystem sys(p);
    switch (kind) {
        case TruncKind::zz: return sys.truncated(OpKind::sz, u, OpKind::sz, v);
        case TruncKind::xx: return sys.truncated(OpKind::sigx, u, OpKind::sigx, v);
        case TruncKind::zx: return sys.truncated(OpKind::sz, u, OpKind::sigx, v);
    }
    throw std::logic_error("truncated: bad kind");
}

namespace {

double magnetization_at(ModelParams p, double h, double rho, double lambda) {
    p.h = h;
    p.rho = rho;
    p.lambda = lambda;
    return OracleSystem(p).magnetization();
}

// Central difference with one Richardson step; falls back to a shifted
// stencil around zero so parameters stay finite.
template <class F>
double richardson_derivative(const F& f, double theta) {
    const double eps = (theta != 0.0 ? std::fabs(theta) : 1.0) * 1e-4;
    auto central = [&](double e) { return (f(theta + e) - f(theta - e)) / (2.0 * e); };
    return (4.0 * central(eps / 2) - central(eps)) / 3.0;
}

}  // namespace

Derivatives derivatives(const ModelParams& p) {
    Derivatives d;
    d.dh = richardson_derivative(
        [&](double h) { return magnetization_at(p, h, p.rho, p.lambda); }, p.h);
    d.drho = richardson_derivative(
        [&](double r) { return magnetization_at(p, p.h, r, p.lambda); }, p.rho);
    d.dlambda = richardson_derivative(
        [&](double l) { return magnetization_at(p, p.h, p.rho, l); }, p.lambda);

    // Quadrature route: periodic trapezoid over the time circle.
    const int nq = 64;
    OracleSystem sys(p);
    const Point origin{site_from_index(0, p), 0.0};
    const double w = p.beta / nq;
    double sh = 0.0, srho = 0.0, slam = 0.0;
    for (int k = 0; k < nq; ++k) {
        const double t = p.beta * k / nq;
        for (int i = 0; i < p.n_sites(); ++i) {
            const Point pt{site_from_index(i, p), t};
            sh += sys.truncated(OpKind::sz, origin, OpKind::sz, pt);
            slam += sys.truncated(OpKind::sz, origin, OpKind::sigx, pt);
        }
        for (const auto& e : edges(p)) {
            const Point pw{e.a, t}, pz{e.b, t};
            const double joint = sys.ordered_correlation(
                {{OpKind::sz, origin}, {OpKind::sz, pw}, {OpKind::sz, pz}});
            const double pairv =
                sys.ordered_correlation({{OpKind::sz, pw}, {OpKind::sz, pz}});
            const double m0 = sys.magnetization();
            srho += e.coupling * (joint - m0 * pairv);
        }
    }
    d.dh_q = w * sh;
    d.drho_q = w * srho;
    d.dlambda_q = w * slam;

    auto rel = [](double a, double b) {
        const double scale = std::max({std::fabs(a), std::fabs(b), 1e-12});
        return std::fabs(a - b) / scale;
    };
    d.max_rel_discrepancy =
        std::max({rel(d.dh, d.dh_q), rel(d.drho, d.drho_q), rel(d.dlambda, d.dlambda_q)});
    return d;
}

DiffIneqRow diffineq_point(const ModelParams& p) {
    DiffIneqRow r{};
    r.h = p.h;
    r.rho = p.rho;
    r.lambda = p.lambda;
    r.beta = p.beta;
    r.N = p.N;
    const double M = OracleSystem(p).magnetization();
    if (!(M < 1.0)) throw std::runtime_error("diffineq: magnetization >= 1");
    const Derivatives d = derivatives(p);
    r.M = M;
    r.dMdh = d.dh;
    r.dMdrho = d.drho;
    r.dMdlambda = d.dlambda;
    r.slack1 = p.h * d.dh + M * M * M + M * M * p.rho * d.drho -
               2.0 * p.lambda * M * M * d.dlambda - M;
    r.slack2a = (M / (1.0 - M * M)) * d.dh + d.dlambda;
    r.slack2b = jbar(p) * M * d.dh - d.drho;
    const double tol = -1e-6;
    r.pass = r.slack1 >= tol && r.slack2a >= tol && r.slack2b >= tol;
    return r;
}

std::vector<DiffIneqRow> diffineq_report(const ModelParams& base, const std::vector<double>& hs,
                                         const std::vector<double>& rhos,
                                         const std::vector<double>& lambdas,
                                         const std::vector<double>& betas) {
    std::vector<DiffIneqRow> rows;
    for (double beta : betas) {
        for (double h : hs) {
            for (double rho : rhos) {
                for (double lambda : lambdas) {
                    ModelParams p = base;
                    p.h = h;
                    p.rho = rho;
                    p.lambda = lambda;
                    p.beta = beta;
                    rows.push_back(diffineq_point(p));
                }
            }
        }
    }
    return rows;
}

std::string diffineq_csv_header() {
    return "h,rho,lambda,beta,N,M,dMdh,dMdrho,dMdlambda,slack1,slack2a,slack2b,pass";
}

std::string diffineq_csv_row(const DiffIneqRow& r) {
    char buf[400];
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d", r.h,
                  r.rho, r.lambda, r.beta, r.N, r.M, r.dMdh, r.dMdrho, r.dMdlambda, r.slack1,
                  r.slack2a, r.slack2b, r.pass ? 1 : 0);
    return buf;
}

}  // namespace rcr
