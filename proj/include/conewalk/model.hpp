#pragma once

#include <string>
#include <vector>

#include "conewalk/jumps.hpp"
#include "conewalk/linalg.hpp"

namespace conewalk {

/// One catalogued summand of the state-dependent drift Gamma. Every form
/// maps PSD inputs to PSD outputs, is locally Lipschitz on the open cone
/// and has linear growth.
struct GammaTerm {
  enum class Form { constant, congruence, scaled_trace };

  Form form = Form::constant;
  SymMatrixd c;                 // constant: C; scaled_trace: the PSD direction C
  std::vector<MatrixXd> a;      // congruence: Gamma(x) = sum_k A_k x A_k^T
  double offset = 0.0;          // scaled_trace: gamma(x) = offset + coef * Tr(x^power)
  double coef = 0.0;
  double power = 1.0;           // restricted to [0, 1] for linear growth
};

/// Gamma as a sum of catalogue terms; the empty sum is Gamma = 0.
class GammaSpec {
 public:
  GammaSpec() = default;

  static GammaSpec zero() { return {}; }
  static GammaSpec constant(SymMatrixd c);
  static GammaSpec congruence(std::vector<MatrixXd> a);
  static GammaSpec scaled_trace(double offset, double coef, double power, SymMatrixd c);

  GammaSpec operator+(const GammaSpec& other) const;

  SymMatrixd operator()(const SymMatrixd& x) const;
  /// Same, reusing a spectral form of x.
  SymMatrixd evaluate(const SymMatrixd& x, const SpectralFormd& s) const;

  const std::vector<GammaTerm>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  /// True when no congruence term is present; such Gammas admit closed-form
  /// reductions of the sufficient conditions.
  bool is_symbolic() const;
  void validate(Index dim) const;

 private:
  std::vector<GammaTerm> terms_;
};

enum class Family { general, wishart, gcir, ou };

std::string to_string(Family f);
Family family_from_string(const std::string& s);

/// Scalar time modulation m(t) = 1 + amplitude * sin(2 pi frequency t) with
/// |amplitude| < 1, so m is continuous and positive.
struct Modulation {
  double amplitude = 0.0;
  double frequency = 0.0;

  double operator()(double t) const;
  bool is_constant() const noexcept { return amplitude == 0.0 || frequency == 0.0; }
};

/// Full description of
///   dX = F dB G + G^T dB^T F^T + H dt + K(X-) dJ
/// with the families
///   wishart: F = x^{1/2}, G = Q, H = x beta + beta^T x + Gamma(x) + b
///   gcir:    F = x^alpha, otherwise as wishart
///   ou:      F = G = 0,   H as above
///   general: gcir coefficients, each multiplied by m(t)
class ModelSpec {
 public:
  Family family = Family::wishart;
  Index dim = 1;
  double alpha = 0.5;
  MatrixXd q;
  MatrixXd beta;
  SymMatrixd b;
  GammaSpec gamma;
  KSpec k;
  JumpSpec jump;
  double drift_floor = 0.0;
  Modulation modulation;

  /// Presets. drift_floor defaults to 2 Tr(beta).
  static ModelSpec wishart(MatrixXd q, MatrixXd beta, SymMatrixd b, GammaSpec gamma = {});
  /// Wishart with b = delta Q^T Q, beta = 0, Gamma = 0.
  static ModelSpec wishart_delta(MatrixXd q, double delta);
  static ModelSpec gcir(double alpha, MatrixXd q, MatrixXd beta, SymMatrixd b, GammaSpec gamma = {});
  static ModelSpec ou(MatrixXd beta, SymMatrixd b, GammaSpec gamma = {});
  static ModelSpec general(double alpha, MatrixXd q, MatrixXd beta, SymMatrixd b, GammaSpec gamma,
                           Modulation modulation, double drift_floor);

  ModelSpec with_jumps(JumpSpec j, KSpec op) const;

  /// Exponent of F(x) = x^p (0 for ou, where F vanishes).
  double diffusion_power() const { return family == Family::wishart ? 0.5 : alpha; }
  bool has_diffusion() const { return family != Family::ou; }
  /// Q^T Q.
  SymMatrixd qtq() const;

  void validate() const;
};

/// F, G, H at (t, x) plus f = F F^T and g = G^T G.
struct CoefficientSet {
  MatrixXd big_f;
  MatrixXd big_g;
  SymMatrixd h;
  SymMatrixd f;
  SymMatrixd g;
};

/// Requires x positive definite; throws NotInteriorError otherwise.
CoefficientSet coefficients(const ModelSpec& model, double t, const SymMatrixd& x);
/// Same, reusing a spectral form of x (the simulator has one already).
CoefficientSet coefficients(const ModelSpec& model, double t, const SymMatrixd& x,
                            const SpectralFormd& s);

/// l(t,x) = Tr(H x^-1) - Tr(f x^-1) Tr(g x^-1) - Tr(f x^-1 g x^-1).
double drift_margin(const ModelSpec& model, double t, const SymMatrixd& x);
double drift_margin(const CoefficientSet& cs, const SymMatrixd& x_inv);

/// Wishart reduction 2 Tr(beta) + Tr((Gamma(x) + b - (d+1) Q^T Q) x^-1).
/// Throws std::invalid_argument for other families.
double wishart_margin_identity(const ModelSpec& model, const SymMatrixd& x);

/// GCIR reduction 2 Tr(beta) + Tr(Gamma(x) x^-1 + b x^-1)
///   - Tr(x^{2a-1}) Tr(Q^T Q x^-1) - Tr(x^{2a-2} Q^T Q).
double gcir_margin_identity(const ModelSpec& model, const SymMatrixd& x);

/// d[X_ij, X_kl]^c / dt = f_ik g_jl + f_il g_jk + f_jk g_il + f_jl g_ik.
Tensor4d covariation_tensor(const CoefficientSet& cs);

}  // namespace conewalk
