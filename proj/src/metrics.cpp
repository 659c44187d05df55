#include "tbgcn/metrics.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace tbgcn::metrics {

double roc_auc(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores) {
    if (pos_scores.empty() || neg_scores.empty()) {
        throw std::invalid_argument("roc_auc: need at least one positive and one negative");
    }
    // average ranks over the pooled sample, ties share their mean rank
    struct Item { double score; bool pos; };
    std::vector<Item> all;
    all.reserve(pos_scores.size() + neg_scores.size());
    for (double s : pos_scores) all.push_back({s, true});
    for (double s : neg_scores) all.push_back({s, false});
    std::sort(all.begin(), all.end(), [](const Item& a, const Item& b) { return a.score < b.score; });
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].score == all[i].score) ++j;
        const double mean_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t k = i; k < j; ++k)
            if (all[k].pos) pos_rank_sum += mean_rank;
        i = j;
    }
    const double np = static_cast<double>(pos_scores.size());
    const double nn = static_cast<double>(neg_scores.size());
    return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double average_precision(const std::vector<double>& pos_scores,
                         const std::vector<double>& neg_scores) {
    if (pos_scores.empty() || neg_scores.empty()) {
        throw std::invalid_argument("average_precision: need at least one positive and one negative");
    }
    struct Item { double score; bool pos; };
    std::vector<Item> all;
    all.reserve(pos_scores.size() + neg_scores.size());
    for (double s : neg_scores) all.push_back({s, false});
    for (double s : pos_scores) all.push_back({s, true});
    // descending score; within ties the stable sort keeps negatives first
    std::stable_sort(all.begin(), all.end(),
                     [](const Item& a, const Item& b) { return a.score > b.score; });
    double ap = 0.0;
    int seen_pos = 0;
    for (std::size_t r = 0; r < all.size(); ++r) {
        if (all[r].pos) {
            ++seen_pos;
            ap += static_cast<double>(seen_pos) / static_cast<double>(r + 1);
        }
    }
    return ap / static_cast<double>(pos_scores.size());
}

double f1(const std::vector<int>& predictions, const std::vector<int>& labels, Averaging avg) {
    if (predictions.size() != labels.size()) {
        throw std::invalid_argument("f1: prediction/label length mismatch");
    }
    if (predictions.empty()) throw std::invalid_argument("f1: empty input");
    std::map<int, int> tp, fp, fn;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == labels[i]) {
            tp[labels[i]] += 1;
        } else {
            fp[predictions[i]] += 1;
            fn[labels[i]] += 1;
        }
    }
    if (avg == Averaging::micro) {
        // single-label multiclass micro-F1 reduces to accuracy
        int correct = 0;
        for (std::size_t i = 0; i < predictions.size(); ++i)
            if (predictions[i] == labels[i]) ++correct;
        return static_cast<double>(correct) / static_cast<double>(predictions.size());
    }
    std::map<int, bool> present;
    for (int c : predictions) present[c] = true;
    for (int c : labels) present[c] = true;
    double total = 0.0;
    int n_classes = 0;
    for (auto [c, _] : present) {
        const double t = tp.count(c) ? tp[c] : 0;
        const double p = fp.count(c) ? fp[c] : 0;
        const double n = fn.count(c) ? fn[c] : 0;
        const double denom = 2.0 * t + p + n;
        total += denom > 0.0 ? 2.0 * t / denom : 0.0;
        ++n_classes;
    }
    return total / n_classes;
}

}  // namespace tbgcn::metrics
