#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "gringotts/errors.hpp"
#include "gringotts/network.hpp"

namespace gringotts {

/// How a clearing outcome is turned into a loss to the Wizarding economy.
enum class LossDefinition {
  /// Unpaid obligations to society plus the central bank's shortfall on
  /// its non-society obligations.
  Additive,
  /// Unpaid obligations to society only.
  SocietyOnly,
};

struct ClearingParams {
  double alpha = 0.9;  // recovery on external assets of a defaulting bank
  double beta = 0.9;   // recovery on interbank receipts of a defaulting bank
  double tolerance = 1e-12;
  int max_iterations = 1'000'000;
  LossDefinition loss_definition = LossDefinition::Additive;
  bool record_rounds = false;

  /// A single bankruptcy cost c destroys the same fraction of both asset
  /// classes: alpha = beta = 1 - c.
  static ClearingParams from_bankruptcy_cost(double cost) {
    ClearingParams params;
    params.alpha = params.beta = 1.0 - cost;
    return params;
  }

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("clearing: alpha must lie in [0,1]");
    if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("clearing: beta must lie in [0,1]");
    if (!(tolerance > 0.0)) throw DomainError("clearing: tolerance must be positive");
    if (max_iterations < 1) throw DomainError("clearing: max_iterations must be positive");
  }
};

template <typename Scalar = double>
struct ClearingOutcome {
  VectorX<Scalar> payments;
  Eigen::Array<bool, Eigen::Dynamic, 1> defaults;
  VectorX<Scalar> equities;
  Scalar societal_loss = Scalar(0);
  int iterations = 0;
  /// Default set after each fictitious-default round (only with record_rounds).
  std::vector<Eigen::Array<bool, Eigen::Dynamic, 1>> default_rounds;

  Eigen::Index default_count() const { return defaults.count(); }
};

/// A network prepared for repeated clearing under fixed recovery rates.
///
/// Holds p̄, π and the receipt operator R = π_interbankᵀ, so that bank i
/// receives (R p)(i) when every bank j pays p(j). Immutable after
/// construction and safe to share across threads; per-call scratch lives in
/// a Workspace owned by the caller.
template <typename Scalar = double>
class ClearingSystem {
 public:
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;
  using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

  struct Workspace {
    Vector payments, received;
    Mask defaults, previous;
    std::vector<Eigen::Index> members;
    Matrix system;
    Vector rhs;
  };

  ClearingSystem(const BasicNetwork<Scalar>& net, const ClearingParams& params) : params_(params) {
    net.validate();
    params.validate();
    const auto rel = relative_liabilities(net);
    total_ = rel.total;
    society_share_ = rel.relative.col(net.society());
    receipts_ = rel.relative.leftCols(net.size()).transpose();
    full_receipts_ = receipts_ * total_;
    central_bank_ = net.central_bank.value_or(-1);
    slack_ = total_.unaryExpr([](Scalar t) { return Scalar(1e-9) * std::max(Scalar(1), t); });
  }

  Eigen::Index size() const { return total_.size(); }
  const Vector& total_obligations() const { return total_; }
  const Vector& society_share() const { return society_share_; }
  const Matrix& receipts() const { return receipts_; }
  const ClearingParams& params() const { return params_; }

  /// Greatest clearing vector via fictitious default: start from full
  /// payment, solve the linear system of the current default set, and repeat
  /// until the set stops growing.
  ClearingOutcome<Scalar> clear(const Eigen::Ref<const Vector>& assets) const {
    Workspace ws;
    ClearingOutcome<Scalar> out;
    out.iterations = fictitious_default(assets, ws, params_.record_rounds ? &out.default_rounds : nullptr);
    finish(assets, ws.payments, out);
    return out;
  }

  /// Picard iteration p <- Φ(p) from p = p̄. Independent of the linear-solve
  /// path; used as an oracle.
  ClearingOutcome<Scalar> picard(const Eigen::Ref<const Vector>& assets) const {
    check_assets(assets);
    Vector p = total_;
    Vector next(size());
    int it = 0;
    for (;;) {
      if (it >= params_.max_iterations)
        throw SolverError("picard: no convergence within " + std::to_string(params_.max_iterations) + " iterations",
                          std::vector<double>(p.data(), p.data() + p.size()));
      ++it;
      const Vector received = receipts_ * p;
      Scalar change = 0;
      for (Eigen::Index i = 0; i < size(); ++i) {
        next(i) = solvent(assets(i), received(i), i) ? total_(i)
                                                      : Scalar(params_.alpha) * assets(i) + Scalar(params_.beta) * received(i);
        const Scalar scale = std::max(total_(i), std::numeric_limits<Scalar>::min());
        change = std::max(change, Scalar(std::abs(next(i) - p(i)) / scale));
      }
      p.swap(next);
      if (change < Scalar(params_.tolerance)) break;
    }
    ClearingOutcome<Scalar> out;
    out.iterations = it;
    finish(assets, p, out);
    return out;
  }

  /// Societal loss only, skipping the outcome bookkeeping. Returns zero
  /// without a solve when every bank can pay in full.
  Scalar loss(const Eigen::Ref<const Vector>& assets, Workspace& ws) const {
    bool all_solvent = true;
    for (Eigen::Index i = 0; i < size() && all_solvent; ++i)
      all_solvent = solvent(assets(i), full_receipts_(i), i);
    if (all_solvent) return Scalar(0);
    fictitious_default(assets, ws, nullptr);
    return societal_loss(ws.payments);
  }

  Scalar societal_loss(const Vector& payments) const {
    const Vector shortfall = (total_ - payments).cwiseMax(Scalar(0));
    Scalar loss = society_share_.dot(shortfall);
    if (params_.loss_definition == LossDefinition::Additive && central_bank_ >= 0)
      loss += (Scalar(1) - society_share_(central_bank_)) * shortfall(central_bank_);
    return loss;
  }

 private:
  bool solvent(Scalar asset, Scalar received, Eigen::Index i) const {
    return asset + received >= total_(i) - slack_(i);
  }

  void check_assets(const Eigen::Ref<const Vector>& assets) const {
    if (assets.size() != size()) throw DomainError("clearing: asset vector length does not match network");
    for (Eigen::Index i = 0; i < size(); ++i)
      if (!(assets(i) >= Scalar(0)) || !std::isfinite(double(assets(i))))
        throw DomainError("clearing: shocked assets must be finite and non-negative");
  }

  int fictitious_default(const Eigen::Ref<const Vector>& assets, Workspace& ws, std::vector<Mask>* rounds) const {
    check_assets(assets);
    const auto n = size();
    const Scalar alpha(params_.alpha), beta(params_.beta);
    ws.payments = total_;
    ws.previous = Mask::Constant(n, false);
    int solves = 0;
    for (Eigen::Index round = 0; round <= n; ++round) {
      ws.received.noalias() = receipts_ * ws.payments;
      ws.defaults.resize(n);
      for (Eigen::Index i = 0; i < n; ++i) ws.defaults(i) = !solvent(assets(i), ws.received(i), i);
      if ((ws.defaults == ws.previous).all()) return solves;
      if (rounds) rounds->push_back(ws.defaults);

      ws.members.clear();
      for (Eigen::Index i = 0; i < n; ++i)
        if (ws.defaults(i)) ws.members.push_back(i);
      const auto m = static_cast<Eigen::Index>(ws.members.size());

      // (I - β R_DD) p_D = α a_D + β R_DS p̄_S
      if (m == 0) {
        ws.payments = total_;
        ws.previous = ws.defaults;
        continue;
      }
      if (ws.system.rows() != n) ws.system.resize(n, n);
      if (ws.rhs.size() != n) ws.rhs.resize(n);
      for (Eigen::Index r = 0; r < m; ++r) {
        const auto i = ws.members[r];
        Scalar from_solvent = 0;
        for (Eigen::Index j = 0; j < n; ++j)
          if (!ws.defaults(j)) from_solvent += receipts_(i, j) * total_(j);
        ws.rhs(r) = alpha * assets(i) + beta * from_solvent;
        for (Eigen::Index c = 0; c < m; ++c)
          ws.system(r, c) = (r == c ? Scalar(1) : Scalar(0)) - beta * receipts_(i, ws.members[c]);
      }
      if (!eliminate(ws.system, ws.rhs, m))
        throw SolverError("fictitious default: singular payment system (closed default cycle without recovery loss)",
                          std::vector<double>(ws.payments.data(), ws.payments.data() + n));
      ws.payments = total_;
      for (Eigen::Index r = 0; r < m; ++r) ws.payments(ws.members[r]) = std::clamp(ws.rhs(r), Scalar(0), total_(ws.members[r]));
      ws.previous = ws.defaults;
      ++solves;
    }
    throw SolverError("fictitious default: default set did not stabilize",
                      std::vector<double>(ws.payments.data(), ws.payments.data() + n));
  }

  /// Gaussian elimination with partial pivoting on the leading m x m block,
  /// in place; the solution overwrites rhs. False when a pivot vanishes.
  static bool eliminate(Matrix& a, Vector& rhs, Eigen::Index m) {
    for (Eigen::Index c = 0; c < m; ++c) {
      Eigen::Index pivot = c;
      for (Eigen::Index r = c + 1; r < m; ++r)
        if (std::abs(a(r, c)) > std::abs(a(pivot, c))) pivot = r;
      if (!(std::abs(a(pivot, c)) > Scalar(1e-13))) return false;
      if (pivot != c) {
        for (Eigen::Index k = c; k < m; ++k) std::swap(a(c, k), a(pivot, k));
        std::swap(rhs(c), rhs(pivot));
      }
      for (Eigen::Index r = c + 1; r < m; ++r) {
        const Scalar f = a(r, c) / a(c, c);
        if (f == Scalar(0)) continue;
        for (Eigen::Index k = c + 1; k < m; ++k) a(r, k) -= f * a(c, k);
        rhs(r) -= f * rhs(c);
      }
    }
    for (Eigen::Index r = m - 1; r >= 0; --r) {
      Scalar v = rhs(r);
      for (Eigen::Index k = r + 1; k < m; ++k) v -= a(r, k) * rhs(k);
      rhs(r) = v / a(r, r);
    }
    return true;
  }

  void finish(const Eigen::Ref<const Vector>& assets, const Vector& payments, ClearingOutcome<Scalar>& out) const {
    const auto n = size();
    out.payments = payments;
    const Vector received = receipts_ * payments;
    out.defaults.resize(n);
    out.equities.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      out.defaults(i) = !solvent(assets(i), received(i), i);
      out.equities(i) = out.defaults(i) ? Scalar(0) : std::max(Scalar(0), assets(i) + received(i) - total_(i));
    }
    out.societal_loss = societal_loss(payments);
  }

  ClearingParams params_;
  Vector total_;
  Vector society_share_;
  Matrix receipts_;
  Vector full_receipts_;
  Vector slack_;
  Eigen::Index central_bank_ = -1;
};

template <typename Scalar, typename Derived>
ClearingOutcome<Scalar> clear_fictitious_default(const BasicNetwork<Scalar>& net,
                                                 const Eigen::MatrixBase<Derived>& shocked_assets,
                                                 const ClearingParams& params) {
  return ClearingSystem<Scalar>(net, params).clear(shocked_assets.template cast<Scalar>());
}

template <typename Scalar, typename Derived>
ClearingOutcome<Scalar> clear_picard(const BasicNetwork<Scalar>& net, const Eigen::MatrixBase<Derived>& shocked_assets,
                                     const ClearingParams& params) {
  return ClearingSystem<Scalar>(net, params).picard(shocked_assets.template cast<Scalar>());
}

template <typename Scalar>
Scalar societal_loss(const ClearingOutcome<Scalar>& outcome, const BasicNetwork<Scalar>& net,
                     LossDefinition definition = LossDefinition::Additive) {
  ClearingParams params;
  params.loss_definition = definition;
  return ClearingSystem<Scalar>(net, params).societal_loss(outcome.payments);
}

}  // namespace gringotts
