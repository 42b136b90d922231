#pragma once

// Exact dense-operator computations for small systems: partition
// function, thermal and imaginary-time-ordered correlations, truncated
// correlations, parameter derivatives and differential-inequality
// reports.  Everything goes through one symmetric eigendecomposition of
// the Hamiltonian, stable for all beta.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "rcr/lattice.hpp"

namespace rcr {

enum class OpKind { sz, sigx };  // sigx is (I + sigma^x)/2

struct Insertion {
    OpKind kind;
    Point at;
};

/// Eigendecomposed system; reuse one instance for many correlations at
/// the same parameters.
class OracleSystem {
  public:
    explicit OracleSystem(const ModelParams& p);  // throws when N^d > 12

    const ModelParams& params() const { return params_; }
    int dim() const { return dim_; }

    double log_partition_function() const;  // includes the normalization prefactor
    double partition_function() const;
    double magnetization() const;  // <sigma^z at site 0>

    /// Tr(e^{-(beta-t_k)H} O_k ... O_1 e^{-t_1 H}) / Tr(e^{-beta H});
    /// insertion times must be sorted ascending.
    double ordered_correlation(const std::vector<Insertion>& ins) const;

    /// <A_u B_v> (time-ordered) minus <A><B>.
    double truncated(OpKind a, const Point& u, OpKind b, const Point& v) const;

  private:
    const Eigen::MatrixXd& op_in_eigenbasis(OpKind k, int site) const;

    ModelParams params_;
    int dim_;
    Eigen::VectorXd energies_;  // shifted so the ground state is 0
    double e_min_;
    Eigen::MatrixXd vecs_;
    mutable std::vector<Eigen::MatrixXd> cache_sz_, cache_sigx_;
    mutable std::vector<char> have_sz_, have_sigx_;
};

/// The Hamiltonian matrix with the convention that the displayed
/// ferromagnetic sum equals -H.
Eigen::MatrixXd build_hamiltonian(const ModelParams& p);

double partition_function(const ModelParams& p);
double magnetization(const ModelParams& p);
double ordered_correlation(const ModelParams& p, const std::vector<Insertion>& ins);

enum class TruncKind { zz, xx, zx };
double truncated(const ModelParams& p, TruncKind kind, const Point& u, const Point& v);

struct Derivatives {
    double dh = 0.0, drho = 0.0, dlambda = 0.0;          // Richardson finite differences
    double dh_q = 0.0, drho_q = 0.0, dlambda_q = 0.0;    // quadrature of truncated correlations
    double max_rel_discrepancy = 0.0;
};

/// Both derivative routes: central finite differences (relative step
/// 1e-4, one Richardson step) and trapezoid quadrature (64 nodes) of
/// the corresponding truncated correlations.
Derivatives derivatives(const ModelParams& p);

struct DiffIneqRow {
    double h, rho, lambda, beta;
    int N;
    double M, dMdh, dMdrho, dMdlambda;
    double slack1, slack2a, slack2b;
    bool pass;
};

/// slack1 = h M_h + M^3 + M^2 rho M_rho - 2 lambda M^2 M_lambda - M,
/// slack2a = (M/(1-M^2)) M_h + M_lambda, slack2b = Jbar M M_h - M_rho;
/// pass iff every slack >= -1e-6.
DiffIneqRow diffineq_point(const ModelParams& p);

std::vector<DiffIneqRow> diffineq_report(const ModelParams& base, const std::vector<double>& hs,
                                         const std::vector<double>& rhos,
                                         const std::vector<double>& lambdas,
                                         const std::vector<double>& betas);

std::string diffineq_csv_header();
std::string diffineq_csv_row(const DiffIneqRow& r);

}  // namespace rcr
