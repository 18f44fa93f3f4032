#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gringotts/calibration.hpp"
#include "gringotts/errors.hpp"

namespace gringotts {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

enum class SystemKind { Monopoly, Split };

/// External assets plus nominal liabilities over n banks and a society sink.
///
/// `liabilities` is n x (n+1): entry (i, j) for j < n is what bank i owes
/// bank j, and the trailing column holds what bank i owes society. Society
/// makes no payments, so it has no row.
template <typename Scalar = double>
struct BasicNetwork {
  std::vector<std::string> banks;
  VectorX<Scalar> external_assets;
  MatrixX<Scalar> liabilities;
  std::optional<Eigen::Index> central_bank;

  Eigen::Index size() const { return external_assets.size(); }
  Eigen::Index society() const { return size(); }

  auto interbank() const { return liabilities.leftCols(size()); }
  auto to_society() const { return liabilities.col(size()); }

  /// Throws DomainError on shape mismatch, negative or non-finite entries,
  /// self-liabilities or an out-of-range central bank index.
  void validate() const {
    const auto n = size();
    if (static_cast<Eigen::Index>(banks.size()) != n)
      throw DomainError("network: bank name count does not match asset vector");
    if (liabilities.rows() != n || liabilities.cols() != n + 1)
      throw DomainError("network: liabilities must be n x (n+1)");
    if (!external_assets.allFinite() || (external_assets.array() < Scalar(0)).any())
      throw DomainError("network: external assets must be finite and non-negative");
    if (!liabilities.allFinite() || (liabilities.array() < Scalar(0)).any())
      throw DomainError("network: liabilities must be finite and non-negative");
    for (Eigen::Index i = 0; i < n; ++i)
      if (liabilities(i, i) != Scalar(0)) throw DomainError("network: bank owes itself");
    if (central_bank && (*central_bank < 0 || *central_bank >= n))
      throw DomainError("network: central bank index out of range");
  }
};

using FinancialNetwork = BasicNetwork<double>;

/// Total obligations p̄ and relative liabilities π (same layout as the
/// liabilities matrix, rows summing to 1 where p̄ > 0 and to 0 otherwise).
template <typename Scalar = double>
struct RelativeLiabilities {
  VectorX<Scalar> total;
  MatrixX<Scalar> relative;
};

template <typename Scalar>
RelativeLiabilities<Scalar> relative_liabilities(const BasicNetwork<Scalar>& net) {
  RelativeLiabilities<Scalar> out;
  out.total = net.liabilities.rowwise().sum();
  out.relative = MatrixX<Scalar>::Zero(net.liabilities.rows(), net.liabilities.cols());
  for (Eigen::Index i = 0; i < net.size(); ++i)
    if (out.total(i) > Scalar(0)) out.relative.row(i) = net.liabilities.row(i) / out.total(i);
  return out;
}

/// Five-bank liabilities in percent of GDP: row owes column. Columns BofG, KWB, SWB, CWF,
/// BWIG, society. Blank cells are zero liabilities.
inline constexpr double kSplitLiabilitiesPercent[5][6] = {
    //  BofG  KWB   SWB   CWF   BWIG  soc
    {0.0, 7.5, 5.0, 0.0, 7.5, 0.0},    // BofG
    {2.0, 0.0, 0.0, 3.0, 7.5, 15.0},   // KWB
    {2.0, 0.0, 0.0, 0.0, 5.0, 15.0},   // SWB
    {0.0, 5.0, 0.0, 0.0, 5.0, 15.0},   // CWF
    {2.0, 5.0, 5.0, 5.0, 0.0, 15.0},   // BWIG
};
inline constexpr double kMonopolySocietyShareOfGdp = 0.60;
inline const std::vector<std::string> kSplitBankNames = {"BofG", "KWB", "SWB", "CWF", "BWIG"};
inline constexpr Eigen::Index kBofG = 0;

/// The five-bank system. The central bank holds its share of GDP as external
/// assets; the four private banks split the remaining bank assets equally
/// (22.25% of GDP each at canonical sizing).
template <typename Scalar = double>
BasicNetwork<Scalar> build_split_network(const EconomyCalibration& calib) {
  if (!(calib.gdp_galleons > 0.0)) throw DomainError("build_split_network: gdp must be positive");
  BasicNetwork<Scalar> net;
  net.banks = kSplitBankNames;
  net.external_assets.resize(5);
  net.external_assets(0) = Scalar(calib.central_bank_assets_galleons);
  const double private_assets = (calib.total_bank_assets_galleons - calib.central_bank_assets_galleons) / 4.0;
  net.external_assets.tail(4).setConstant(Scalar(private_assets));
  net.liabilities.resize(5, 6);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 6; ++j)
      net.liabilities(i, j) = Scalar(kSplitLiabilitiesPercent[i][j] / 100.0 * calib.gdp_galleons);
  net.central_bank = kBofG;
  return net;
}

/// Gringotts as one bank: all bank assets, 60% of GDP owed to society.
template <typename Scalar = double>
BasicNetwork<Scalar> build_monopoly_network(const EconomyCalibration& calib) {
  if (!(calib.gdp_galleons > 0.0)) throw DomainError("build_monopoly_network: gdp must be positive");
  BasicNetwork<Scalar> net;
  net.banks = {"Gringotts"};
  net.external_assets = VectorX<Scalar>::Constant(1, Scalar(calib.total_bank_assets_galleons));
  net.liabilities.resize(1, 2);
  net.liabilities << Scalar(0), Scalar(kMonopolySocietyShareOfGdp * calib.gdp_galleons);
  net.central_bank = 0;
  return net;
}

template <typename Scalar = double>
BasicNetwork<Scalar> build_network(SystemKind kind, const EconomyCalibration& calib) {
  return kind == SystemKind::Monopoly ? build_monopoly_network<Scalar>(calib)
                                      : build_split_network<Scalar>(calib);
}

/// Merges a subset of banks into one entity. Claims between members are
/// internalized, everything else is summed. The merged entity takes the
/// position of the lowest member index; the others keep their order. It is
/// the central bank if any member was.
template <typename Scalar>
BasicNetwork<Scalar> merge(const BasicNetwork<Scalar>& net, const std::set<Eigen::Index>& subset) {
  if (subset.empty()) throw DomainError("merge: empty subset");
  const auto n = net.size();
  for (auto i : subset)
    if (i < 0 || i >= n) throw DomainError("merge: bank index out of range");

  const auto head = *subset.begin();
  std::vector<Eigen::Index> target(n);
  Eigen::Index next = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (subset.count(i) && i != head) continue;
    target[i] = next++;
  }
  for (auto i : subset) target[i] = target[head];
  const auto m = next;

  BasicNetwork<Scalar> out;
  out.banks.resize(m);
  out.external_assets = VectorX<Scalar>::Zero(m);
  out.liabilities = MatrixX<Scalar>::Zero(m, m + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& name = out.banks[target[i]];
    name = name.empty() ? net.banks[i] : name + "+" + net.banks[i];
    out.external_assets(target[i]) += net.external_assets(i);
    out.liabilities(target[i], m) += net.liabilities(i, n);
    for (Eigen::Index j = 0; j < n; ++j)
      if (target[i] != target[j]) out.liabilities(target[i], target[j]) += net.liabilities(i, j);
  }
  if (net.central_bank) out.central_bank = target[*net.central_bank];
  return out;
}

}  // namespace gringotts
