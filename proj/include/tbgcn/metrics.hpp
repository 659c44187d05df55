#ifndef TBGCN_METRICS_HPP
#define TBGCN_METRICS_HPP

#include <stdexcept>
#include <vector>

namespace tbgcn::metrics {

enum class Averaging { micro, macro };

/// Probability that a random positive outranks a random negative, ties
/// counting 1/2 (rank / Mann-Whitney formulation).
double roc_auc(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores);

/// Mean over positives, in descending-score order, of precision at each
/// positive's rank. Ties are broken positives-after-negatives (pessimistic,
/// deterministic).
double average_precision(const std::vector<double>& pos_scores,
                         const std::vector<double>& neg_scores);

/// Multiclass F1. Micro equals accuracy for single-label prediction; macro is
/// the unweighted class mean, skipping classes absent from both sides.
double f1(const std::vector<int>& predictions, const std::vector<int>& labels, Averaging avg);

}  // namespace tbgcn::metrics

#endif  // TBGCN_METRICS_HPP
