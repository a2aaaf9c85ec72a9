#pragma once

/// @file svm.hpp
/// @brief Linear soft-margin SVM trained in the primal by deterministic
///        full-batch subgradient descent, plus its plain-text model format.

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"

namespace nucleograde::features {

struct LinearSvmModel {
    std::vector<double> weights;
    double bias = 0.0;
    int positive_label = 1;
    int negative_label = 0;

    double decision(const std::vector<double>& x) const {
        if (x.size() != weights.size()) {
            throw Error(ErrorCode::DimensionMismatch, "feature dimension does not match the model");
        }
        double s = bias;
        for (std::size_t i = 0; i < x.size(); ++i) s += weights[i] * x[i];
        return s;
    }

    friend bool operator==(const LinearSvmModel&, const LinearSvmModel&) = default;
};

/// positive_label iff w.x + b >= 0.
inline int svm_predict(const LinearSvmModel& model, const std::vector<double>& x) {
    return model.decision(x) >= 0.0 ? model.positive_label : model.negative_label;
}

struct SvmTrainOptions {
    double c_reg = 1.0;
    int iterations = 10000;
    /// Objective is recorded every this many iterations.
    int checkpoint_every = 500;
};

struct SvmTrainResult {
    LinearSvmModel model;
    /// Objective of the best iterate so far at each checkpoint.
    std::vector<double> checkpoints;
};

/// 0.5 |w|^2 + C sum_i max(0, 1 - y_i (w.x_i + b)), y in {-1, +1}.
inline double svm_objective(const std::vector<double>& w, double b,
                            const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                            double c_reg) {
    double reg = 0.0;
    for (double v : w) reg += v * v;
    double hinge = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double s = b;
        for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[i][j];
        hinge += std::max(0.0, 1.0 - y[i] * s);
    }
    return 0.5 * reg + c_reg * hinge;
}

/// Labels equal to `positive_label` map to +1, everything else to -1.
/// Step size is 1/(lambda t) on the objective scaled by 1/(n C), i.e.
/// lambda = 1/(n C). The best iterate seen is returned.
inline SvmTrainResult svm_train_detailed(const std::vector<std::vector<double>>& samples,
                                         const std::vector<int>& labels, const SvmTrainOptions& opt,
                                         int positive_label = 1, int negative_label = 0) {
    if (samples.size() != labels.size()) throw Error(ErrorCode::LengthMismatch, "samples and labels differ in length");
    if (!(opt.c_reg > 0.0)) throw Error(ErrorCode::InvalidArgument, "c_reg must be > 0");
    if (samples.empty()) throw Error(ErrorCode::DegenerateLabels, "no samples");
    const std::size_t dim = samples.front().size();
    for (const auto& s : samples)
        if (s.size() != dim) throw Error(ErrorCode::DimensionMismatch, "samples differ in dimension");

    std::vector<int> y(labels.size());
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        y[i] = labels[i] == positive_label ? 1 : -1;
        n_pos += y[i] > 0;
    }
    if (n_pos == 0 || n_pos == labels.size()) {
        throw Error(ErrorCode::DegenerateLabels, "both classes need at least one sample");
    }

    const double n = static_cast<double>(samples.size());
    const double lambda = 1.0 / (n * opt.c_reg);
    std::vector<double> w(dim, 0.0);
    double b = 0.0;
    std::vector<double> grad(dim);

    SvmTrainResult result;
    result.model = {w, b, positive_label, negative_label};
    double best = svm_objective(w, b, samples, y, opt.c_reg);

    for (int t = 1; t <= opt.iterations; ++t) {
        // Subgradient of lambda/2 |w|^2 + (1/n) sum hinge.
        for (std::size_t j = 0; j < dim; ++j) grad[j] = lambda * w[j];
        double grad_b = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            double s = b;
            for (std::size_t j = 0; j < dim; ++j) s += w[j] * samples[i][j];
            if (y[i] * s < 1.0) {
                for (std::size_t j = 0; j < dim; ++j) grad[j] -= y[i] * samples[i][j] / n;
                grad_b -= y[i] / n;
            }
        }
        const double step = 1.0 / (lambda * t);
        for (std::size_t j = 0; j < dim; ++j) w[j] -= step * grad[j];
        b -= step * grad_b;

        const double obj = svm_objective(w, b, samples, y, opt.c_reg);
        if (obj < best) {
            best = obj;
            result.model.weights = w;
            result.model.bias = b;
        }
        if (opt.checkpoint_every > 0 && t % opt.checkpoint_every == 0) result.checkpoints.push_back(best);
    }
    return result;
}

inline LinearSvmModel svm_train(const std::vector<std::vector<double>>& samples, const std::vector<int>& labels,
                                double c_reg, int positive_label = 1, int negative_label = 0) {
    SvmTrainOptions opt;
    opt.c_reg = c_reg;
    return svm_train_detailed(samples, labels, opt, positive_label, negative_label).model;
}

// ---------------------------------------------------------------------------
// Persistence: "NGSVM1" / dimension / weights / bias / positive negative
// ---------------------------------------------------------------------------

inline constexpr const char* kSvmMagic = "NGSVM1";

namespace detail {

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& token) {
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
        throw Error(ErrorCode::ModelFormat, "bad number '" + token + "'");
    }
    return v;
}

}  // namespace detail

inline void save_model(std::ostream& os, const LinearSvmModel& m) {
    os << kSvmMagic << '\n' << m.weights.size() << '\n';
    for (std::size_t i = 0; i < m.weights.size(); ++i) {
        if (i) os << ' ';
        os << detail::format_double(m.weights[i]);
    }
    os << '\n' << detail::format_double(m.bias) << '\n' << m.positive_label << ' ' << m.negative_label << '\n';
}

inline LinearSvmModel load_model(std::istream& is) {
    std::string line;
    auto next = [&](const char* what) {
        if (!std::getline(is, line)) throw Error(ErrorCode::ModelFormat, std::string("missing ") + what);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };
    if (next("magic") != kSvmMagic) throw Error(ErrorCode::ModelFormat, "bad magic line");
    LinearSvmModel m;
    std::size_t dim = 0;
    {
        std::istringstream ss(next("dimension"));
        if (!(ss >> dim)) throw Error(ErrorCode::ModelFormat, "bad dimension");
    }
    {
        std::istringstream ss(next("weights"));
        std::string tok;
        while (ss >> tok) m.weights.push_back(detail::parse_double(tok));
        if (m.weights.size() != dim) throw Error(ErrorCode::ModelFormat, "weight count does not match dimension");
    }
    {
        std::istringstream ss(next("bias"));
        std::string tok;
        if (!(ss >> tok)) throw Error(ErrorCode::ModelFormat, "missing bias");
        m.bias = detail::parse_double(tok);
    }
    {
        std::istringstream ss(next("labels"));
        if (!(ss >> m.positive_label >> m.negative_label)) throw Error(ErrorCode::ModelFormat, "bad labels line");
    }
    return m;
}

}  // namespace nucleograde::features
