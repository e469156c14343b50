#ifndef HANTEXT_EVAL_HPP
#define HANTEXT_EVAL_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "tensor.hpp"
#include "textprep.hpp"

namespace hantext {

// --- fold plans -------------------------------------------------------------

struct FoldPlan {
    std::size_t k = 10;
    std::size_t repetitions = 1;
    std::uint64_t seed = 1;
    bool stratified = true;
    // assignments[rep][doc] = fold index in [0, k)
    std::vector<std::vector<std::size_t>> assignments;
};

// Seeded shuffle then round-robin. With stratification, shuffling and
// assignment run per class so each fold's class mix tracks the corpus mix.
inline FoldPlan make_folds(std::size_t n_docs, const std::vector<int>& labels,
                           std::size_t k, std::size_t repetitions,
                           std::uint64_t seed, bool stratified) {
    if (k < 2) throw std::invalid_argument("make_folds: k must be >= 2");
    if (k > n_docs) throw std::invalid_argument("make_folds: k exceeds document count");
    if (labels.size() != n_docs) throw std::invalid_argument("make_folds: label count mismatch");

    FoldPlan plan;
    plan.k = k;
    plan.repetitions = repetitions;
    plan.seed = seed;
    plan.stratified = stratified;

    for (std::size_t rep = 0; rep < repetitions; ++rep) {
        Rng rng(derive_seed(seed, rep));
        std::vector<std::size_t> assignment(n_docs, 0);
        if (stratified) {
            const int n_classes = *std::max_element(labels.begin(), labels.end()) + 1;
            // round-robin fold cursor carries over across classes so overall
            // fold sizes stay balanced, not just per-class
            std::size_t cursor = 0;
            for (int c = 0; c < n_classes; ++c) {
                std::vector<std::size_t> members;
                for (std::size_t i = 0; i < n_docs; ++i)
                    if (labels[i] == c) members.push_back(i);
                rng.shuffle(members);
                for (std::size_t m : members) assignment[m] = (cursor++) % k;
            }
        } else {
            std::vector<std::size_t> order(n_docs);
            std::iota(order.begin(), order.end(), 0);
            rng.shuffle(order);
            for (std::size_t i = 0; i < n_docs; ++i) assignment[order[i]] = i % k;
        }
        plan.assignments.push_back(std::move(assignment));
    }
    return plan;
}

// --- classification metrics -------------------------------------------------

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct FoldMetrics {
    double accuracy = 0.0;
    double weighted_f1 = 0.0;
    std::vector<ClassMetrics> per_class;
    std::vector<std::vector<std::size_t>> confusion;  // [true][pred]
};

// P, R, F1 are defined as 0 whenever their denominator is 0.
inline FoldMetrics compute_metrics(const std::vector<int>& y_true,
                                   const std::vector<int>& y_pred,
                                   std::size_t n_classes) {
    if (y_true.size() != y_pred.size())
        throw std::invalid_argument("compute_metrics: length mismatch");
    FoldMetrics m;
    m.confusion.assign(n_classes, std::vector<std::size_t>(n_classes, 0));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] < 0 || static_cast<std::size_t>(y_true[i]) >= n_classes ||
            y_pred[i] < 0 || static_cast<std::size_t>(y_pred[i]) >= n_classes)
            throw std::out_of_range("compute_metrics: label out of range");
        ++m.confusion[static_cast<std::size_t>(y_true[i])][static_cast<std::size_t>(y_pred[i])];
        if (y_true[i] == y_pred[i]) ++correct;
    }
    m.accuracy = y_true.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(y_true.size());

    double weighted_sum = 0.0;
    std::size_t total_support = 0;
    for (std::size_t c = 0; c < n_classes; ++c) {
        ClassMetrics cm;
        const std::size_t tp = m.confusion[c][c];
        std::size_t fp = 0, fn = 0;
        for (std::size_t o = 0; o < n_classes; ++o) {
            if (o == c) continue;
            fp += m.confusion[o][c];
            fn += m.confusion[c][o];
        }
        cm.support = tp + fn;
        cm.precision = (tp + fp) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
        cm.recall = (tp + fn) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
        cm.f1 = (cm.precision + cm.recall) == 0.0 ? 0.0
                    : 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall);
        weighted_sum += static_cast<double>(cm.support) * cm.f1;
        total_support += cm.support;
        m.per_class.push_back(cm);
    }
    m.weighted_f1 = total_support == 0 ? 0.0 : weighted_sum / static_cast<double>(total_support);
    return m;
}

inline std::pair<double, std::vector<ClassMetrics>> weighted_f1(const std::vector<int>& y_true,
                                                                const std::vector<int>& y_pred,
                                                                std::size_t n_classes) {
    FoldMetrics m = compute_metrics(y_true, y_pred, n_classes);
    return {m.weighted_f1, m.per_class};
}

// --- paired t-test ----------------------------------------------------------

namespace detail {

// Regularized incomplete beta I_x(a, b) by the Lentz continued fraction.
inline double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

inline double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace detail

// Two-tailed p for a Student t statistic with df degrees of freedom.
inline double t_two_tailed_p(double t, double df) {
    if (t == 0.0) return 1.0;
    const double x = df / (df + t * t);
    return detail::incomplete_beta(df / 2.0, 0.5, x);
}

struct TTestResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
};

// Paired t-test over fold-aligned score pairs, sample sd (n-1 denominator).
// All-zero differences give t = 0, p = 1.
inline TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("paired_ttest: length mismatch");
    const std::size_t n = a.size();
    if (n < 2) throw std::invalid_argument("paired_ttest: need at least 2 pairs");
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : d) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    TTestResult r;
    r.df = static_cast<double>(n - 1);
    if (sd == 0.0) {
        r.t = 0.0;
        r.p = mean == 0.0 ? 1.0 : 0.0;  // identical nonzero shift on every fold
        return r;
    }
    r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
    r.p = t_two_tailed_p(r.t, r.df);
    return r;
}

// --- cross-validation harness -----------------------------------------------

struct MetricsReport {
    std::string config_name;
    std::vector<FoldMetrics> folds;  // rep-major order: rep0 fold0..k-1, rep1 ...
    double mean_accuracy = 0.0, sd_accuracy = 0.0;
    double mean_weighted_f1 = 0.0, sd_weighted_f1 = 0.0;

    std::vector<double> fold_accuracies() const {
        std::vector<double> v;
        for (const auto& f : folds) v.push_back(f.accuracy);
        return v;
    }
    std::vector<double> fold_f1s() const {
        std::vector<double> v;
        for (const auto& f : folds) v.push_back(f.weighted_f1);
        return v;
    }

    void aggregate() {
        auto stats = [](const std::vector<double>& v) {
            const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
            double ss = 0.0;
            for (double x : v) ss += (x - mean) * (x - mean);
            const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
            return std::make_pair(mean, sd);
        };
        std::tie(mean_accuracy, sd_accuracy) = stats(fold_accuracies());
        std::tie(mean_weighted_f1, sd_weighted_f1) = stats(fold_f1s());
    }
};

// Trains on the given split and returns predictions for the test documents,
// in order. The derived seed makes fold cycles independent of scheduling.
using FoldRunner = std::function<std::vector<int>(const std::vector<Document>& train,
                                                  const std::vector<Document>& test,
                                                  std::uint64_t fold_seed)>;

inline MetricsReport run_cv(const Corpus& corpus, const FoldPlan& plan,
                            const FoldRunner& runner, std::size_t jobs = 1,
                            const std::string& config_name = "") {
    if (plan.assignments.empty()) throw std::invalid_argument("run_cv: empty fold plan");
    for (const auto& assignment : plan.assignments)
        if (assignment.size() != corpus.docs.size())
            throw std::invalid_argument("run_cv: fold plan does not cover the corpus");

    const std::size_t n_tasks = plan.repetitions * plan.k;
    MetricsReport report;
    report.config_name = config_name;
    report.folds.resize(n_tasks);

    std::vector<std::string> errors(n_tasks);
    auto run_task = [&](std::size_t task) {
        const std::size_t rep = task / plan.k;
        const std::size_t fold = task % plan.k;
        try {
            std::vector<Document> train_docs, test_docs;
            std::vector<int> y_true;
            for (std::size_t i = 0; i < corpus.docs.size(); ++i) {
                if (plan.assignments[rep][i] == fold) {
                    test_docs.push_back(corpus.docs[i]);
                    y_true.push_back(corpus.docs[i].label);
                } else {
                    train_docs.push_back(corpus.docs[i]);
                }
            }
            const std::uint64_t fold_seed = derive_seed(plan.seed, rep + 1, fold + 1);
            const std::vector<int> y_pred = runner(train_docs, test_docs, fold_seed);
            if (y_pred.size() != y_true.size())
                throw std::runtime_error("fold runner returned wrong prediction count");
            report.folds[task] = compute_metrics(y_true, y_pred, corpus.n_classes());
        } catch (const std::exception& e) {
            errors[task] = "rep " + std::to_string(rep) + " fold " + std::to_string(fold) + ": " + e.what();
        }
    };

    if (jobs <= 1) {
        for (std::size_t t = 0; t < n_tasks; ++t) run_task(t);
    } else {
        std::vector<std::thread> workers;
        std::atomic<std::size_t> next{0};
        const std::size_t n_workers = std::min(jobs, n_tasks);
        for (std::size_t w = 0; w < n_workers; ++w)
            workers.emplace_back([&]() {
                for (std::size_t t = next.fetch_add(1); t < n_tasks; t = next.fetch_add(1))
                    run_task(t);
            });
        for (auto& th : workers) th.join();
    }

    for (const auto& err : errors)
        if (!err.empty()) throw std::runtime_error("run_cv: " + err);

    report.aggregate();
    return report;
}

// --- report serialization ---------------------------------------------------

namespace detail {
inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}
}  // namespace detail

inline std::string render_report(const MetricsReport& report) {
    std::ostringstream out;
    out << "[report " << report.config_name << "]\n";
    for (std::size_t i = 0; i < report.folds.size(); ++i) {
        const FoldMetrics& f = report.folds[i];
        out << "fold " << i << " accuracy=" << detail::fmt(f.accuracy)
            << " weighted_f1=" << detail::fmt(f.weighted_f1) << "\n";
        for (std::size_t c = 0; c < f.per_class.size(); ++c)
            out << "  class " << c << " precision=" << detail::fmt(f.per_class[c].precision)
                << " recall=" << detail::fmt(f.per_class[c].recall)
                << " f1=" << detail::fmt(f.per_class[c].f1)
                << " support=" << f.per_class[c].support << "\n";
    }
    out << "aggregate accuracy_mean=" << detail::fmt(report.mean_accuracy)
        << " accuracy_sd=" << detail::fmt(report.sd_accuracy)
        << " weighted_f1_mean=" << detail::fmt(report.mean_weighted_f1)
        << " weighted_f1_sd=" << detail::fmt(report.sd_weighted_f1) << "\n";
    return out.str();
}

}  // namespace hantext

#endif
