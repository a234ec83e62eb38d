#include "conewalk/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace conewalk {

GammaSpec GammaSpec::constant(SymMatrixd c) {
  GammaSpec g;
  GammaTerm t;
  t.form = GammaTerm::Form::constant;
  t.c = std::move(c);
  g.terms_.push_back(std::move(t));
  return g;
}

GammaSpec GammaSpec::congruence(std::vector<MatrixXd> a) {
  GammaSpec g;
  GammaTerm t;
  t.form = GammaTerm::Form::congruence;
  t.a = std::move(a);
  g.terms_.push_back(std::move(t));
  return g;
}

GammaSpec GammaSpec::scaled_trace(double offset, double coef, double power, SymMatrixd c) {
  GammaSpec g;
  GammaTerm t;
  t.form = GammaTerm::Form::scaled_trace;
  t.offset = offset;
  t.coef = coef;
  t.power = power;
  t.c = std::move(c);
  g.terms_.push_back(std::move(t));
  return g;
}

GammaSpec GammaSpec::operator+(const GammaSpec& other) const {
  GammaSpec g = *this;
  g.terms_.insert(g.terms_.end(), other.terms_.begin(), other.terms_.end());
  return g;
}

bool GammaSpec::is_symbolic() const {
  for (const auto& t : terms_) {
    if (t.form == GammaTerm::Form::congruence) return false;
  }
  return true;
}

void GammaSpec::validate(Index dim) const {
  for (const auto& t : terms_) {
    switch (t.form) {
      case GammaTerm::Form::constant:
        if (t.c.dim() != dim) throw DimensionError("gamma constant has wrong dimension");
        if (!is_psd(t.c)) throw NotInConeError("gamma constant must be PSD", lambda_min(t.c));
        break;
      case GammaTerm::Form::congruence:
        for (const auto& a : t.a) {
          if (a.rows() != dim || a.cols() != dim) {
            throw DimensionError("gamma congruence matrix has wrong dimension");
          }
        }
        break;
      case GammaTerm::Form::scaled_trace:
        if (t.c.dim() != dim) throw DimensionError("gamma trace direction has wrong dimension");
        if (!is_psd(t.c)) throw NotInConeError("gamma trace direction must be PSD", lambda_min(t.c));
        if (!(t.offset >= 0.0) || !(t.coef >= 0.0)) {
          throw Error("gamma scaled_trace requires offset >= 0 and coef >= 0");
        }
        if (!(t.power >= 0.0 && t.power <= 1.0)) {
          throw Error("gamma scaled_trace power must lie in [0, 1]");
        }
        break;
    }
  }
}

SymMatrixd GammaSpec::operator()(const SymMatrixd& x) const {
  if (terms_.empty()) return SymMatrixd::zero(x.dim());
  return evaluate(x, spectral_decompose(x));
}

SymMatrixd GammaSpec::evaluate(const SymMatrixd& x, const SpectralFormd& s) const {
  MatrixXd out = MatrixXd::Zero(x.dim(), x.dim());
  for (const auto& t : terms_) {
    switch (t.form) {
      case GammaTerm::Form::constant:
        out += t.c.matrix();
        break;
      case GammaTerm::Form::congruence:
        for (const auto& a : t.a) out += a * x.matrix() * a.transpose();
        break;
      case GammaTerm::Form::scaled_trace: {
        double tr = 0.0;
        for (Index i = 0; i < s.dim(); ++i) tr += std::pow(std::max(s.eigenvalues(i), 0.0), t.power);
        out += (t.offset + t.coef * tr) * t.c.matrix();
        break;
      }
    }
  }
  return SymMatrixd(out);
}

std::string to_string(Family f) {
  switch (f) {
    case Family::general: return "general";
    case Family::wishart: return "wishart";
    case Family::gcir: return "gcir";
    case Family::ou: return "ou";
  }
  return "general";
}

Family family_from_string(const std::string& s) {
  if (s == "general") return Family::general;
  if (s == "wishart") return Family::wishart;
  if (s == "gcir") return Family::gcir;
  if (s == "ou") return Family::ou;
  throw Error("unknown family '" + s + "'");
}

double Modulation::operator()(double t) const {
  if (is_constant()) return 1.0;
  return 1.0 + amplitude * std::sin(2.0 * std::numbers::pi * frequency * t);
}

namespace {

ModelSpec base(Family family, Index d) {
  ModelSpec m;
  m.family = family;
  m.dim = d;
  m.q = MatrixXd::Zero(d, d);
  m.beta = MatrixXd::Zero(d, d);
  m.b = SymMatrixd::zero(d);
  return m;
}

}  // namespace

ModelSpec ModelSpec::wishart(MatrixXd q, MatrixXd beta, SymMatrixd b, GammaSpec gamma) {
  ModelSpec m = base(Family::wishart, b.dim());
  m.q = std::move(q);
  m.beta = std::move(beta);
  m.b = std::move(b);
  m.gamma = std::move(gamma);
  m.drift_floor = 2.0 * m.beta.trace();
  m.validate();
  return m;
}

ModelSpec ModelSpec::wishart_delta(MatrixXd q, double delta) {
  const Index d = q.rows();
  SymMatrixd b(MatrixXd(delta * q.transpose() * q));
  return wishart(std::move(q), MatrixXd::Zero(d, d), std::move(b));
}

ModelSpec ModelSpec::gcir(double alpha, MatrixXd q, MatrixXd beta, SymMatrixd b, GammaSpec gamma) {
  ModelSpec m = base(Family::gcir, b.dim());
  m.alpha = alpha;
  m.q = std::move(q);
  m.beta = std::move(beta);
  m.b = std::move(b);
  m.gamma = std::move(gamma);
  m.drift_floor = 2.0 * m.beta.trace();
  m.validate();
  return m;
}

ModelSpec ModelSpec::ou(MatrixXd beta, SymMatrixd b, GammaSpec gamma) {
  ModelSpec m = base(Family::ou, b.dim());
  m.beta = std::move(beta);
  m.b = std::move(b);
  m.gamma = std::move(gamma);
  m.drift_floor = 2.0 * m.beta.trace();
  m.validate();
  return m;
}

ModelSpec ModelSpec::general(double alpha, MatrixXd q, MatrixXd beta, SymMatrixd b,
                             GammaSpec gamma, Modulation modulation, double drift_floor) {
  ModelSpec m = base(Family::general, b.dim());
  m.alpha = alpha;
  m.q = std::move(q);
  m.beta = std::move(beta);
  m.b = std::move(b);
  m.gamma = std::move(gamma);
  m.modulation = modulation;
  m.drift_floor = drift_floor;
  m.validate();
  return m;
}

ModelSpec ModelSpec::with_jumps(JumpSpec j, KSpec op) const {
  ModelSpec m = *this;
  m.jump = std::move(j);
  m.k = std::move(op);
  m.validate();
  return m;
}

SymMatrixd ModelSpec::qtq() const { return SymMatrixd(MatrixXd(q.transpose() * q)); }

void ModelSpec::validate() const {
  if (dim < 1) throw DimensionError("model dimension must be >= 1");
  auto square = [this](const MatrixXd& m, const char* name) {
    if (m.rows() != dim || m.cols() != dim) {
      std::ostringstream msg;
      msg << name << ": expected " << dim << "x" << dim << ", got " << m.rows() << "x" << m.cols();
      throw DimensionError(msg.str());
    }
    if (!m.allFinite()) throw Error(std::string(name) + ": entries must be finite");
  };
  square(q, "Q");
  square(beta, "beta");
  square(b.matrix(), "b");
  if (!(alpha >= 0.5 && alpha <= 1.0)) throw Error("alpha out of [0.5, 1]");
  if (family == Family::general &&
      !(std::abs(modulation.amplitude) < 1.0 && modulation.frequency >= 0.0)) {
    throw Error("modulation requires |amplitude| < 1 and frequency >= 0");
  }
  if (!std::isfinite(drift_floor)) throw Error("drift floor must be finite");
  gamma.validate(dim);
  jump.validate(dim);
  if (k.form == KForm::congruence) square(k.a, "k.A");
  if (k.form == KForm::scale && !(k.c >= 0.0)) throw Error("k.c must be >= 0");
}

CoefficientSet coefficients(const ModelSpec& model, double t, const SymMatrixd& x) {
  return coefficients(model, t, x, spectral_decompose(x));
}

CoefficientSet coefficients(const ModelSpec& model, double t, const SymMatrixd& x,
                            const SpectralFormd& s) {
  if (x.dim() != model.dim) throw DimensionError("coefficients: state has wrong dimension");
  if (!(s.lambda_min() > kSingularTol * x.norm())) {
    std::ostringstream msg;
    msg << "coefficients: state not interior (lambda_min = " << s.lambda_min() << ")";
    throw NotInteriorError(msg.str(), s.lambda_min());
  }
  const Index d = model.dim;
  const double m = model.family == Family::general ? model.modulation(t) : 1.0;

  MatrixXd drift = x.matrix() * model.beta + model.beta.transpose() * x.matrix() + model.b.matrix();
  if (!model.gamma.is_zero()) drift += model.gamma.evaluate(x, s).matrix();

  CoefficientSet cs;
  if (model.has_diffusion()) {
    const double p = model.diffusion_power();
    cs.big_f = m * s.apply([p](double l) { return p == 1.0 ? l : std::pow(l, p); });
    cs.big_g = m * model.q;
  } else {
    cs.big_f = MatrixXd::Zero(d, d);
    cs.big_g = MatrixXd::Zero(d, d);
  }
  cs.h = SymMatrixd(MatrixXd(m * drift));
  cs.f = SymMatrixd(MatrixXd(cs.big_f * cs.big_f.transpose()));
  cs.g = SymMatrixd(MatrixXd(cs.big_g.transpose() * cs.big_g));
  return cs;
}

double drift_margin(const CoefficientSet& cs, const SymMatrixd& x_inv) {
  const MatrixXd fx = cs.f.matrix() * x_inv.matrix();
  const MatrixXd gx = cs.g.matrix() * x_inv.matrix();
  return (cs.h.matrix() * x_inv.matrix()).trace() - fx.trace() * gx.trace() -
         (fx * gx).trace();
}

double drift_margin(const ModelSpec& model, double t, const SymMatrixd& x) {
  const auto s = spectral_decompose(x);
  const auto cs = coefficients(model, t, x, s);
  return drift_margin(cs, inv_spd(s));
}

double wishart_margin_identity(const ModelSpec& model, const SymMatrixd& x) {
  if (model.family != Family::wishart) {
    throw std::invalid_argument("wishart_margin_identity: model family is " + to_string(model.family));
  }
  const auto s = spectral_decompose(x);
  const MatrixXd x_inv = inv_spd(s).matrix();
  const double d = static_cast<double>(model.dim);
  MatrixXd core = model.b.matrix() - (d + 1.0) * model.qtq().matrix();
  if (!model.gamma.is_zero()) core += model.gamma.evaluate(x, s).matrix();
  return 2.0 * model.beta.trace() + (core * x_inv).trace();
}

double gcir_margin_identity(const ModelSpec& model, const SymMatrixd& x) {
  if (model.family != Family::gcir && model.family != Family::wishart) {
    throw std::invalid_argument("gcir_margin_identity: model family is " + to_string(model.family));
  }
  const double a = model.diffusion_power();
  const auto s = spectral_decompose(x);
  const MatrixXd x_inv = inv_spd(s).matrix();
  const MatrixXd p = model.qtq().matrix();
  MatrixXd lhs = model.b.matrix();
  if (!model.gamma.is_zero()) lhs += model.gamma.evaluate(x, s).matrix();
  const double tr_pow = s.eigenvalues.array().pow(2.0 * a - 1.0).sum();
  const MatrixXd x_2a2 = spd_power(s, 2.0 * a - 2.0).matrix();
  return 2.0 * model.beta.trace() + (lhs * x_inv).trace() - tr_pow * (p * x_inv).trace() -
         (x_2a2 * p).trace();
}

Tensor4d covariation_tensor(const CoefficientSet& cs) {
  const Index d = cs.f.dim();
  if (cs.g.dim() != d) throw DimensionError("covariation_tensor: f and g differ in dimension");
  const MatrixXd& f = cs.f.matrix();
  const MatrixXd& g = cs.g.matrix();
  Tensor4d t(d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      for (Index k = 0; k < d; ++k)
        for (Index l = 0; l < d; ++l)
          t(i, j, k, l) = f(i, k) * g(j, l) + f(i, l) * g(j, k) + f(j, k) * g(i, l) + f(j, l) * g(i, k);
  return t;
}

}  // namespace conewalk
