#include "poolmaps/classifier.hpp"

#include <cmath>
#include <random>

#include "poolmaps/common.hpp"

namespace poolmaps {

namespace {

double activate(Activation act, double x) {
    if (act == Activation::tanh) return std::tanh(x);
    // numerically stable logistic
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

// derivative expressed through the activation value
double activate_deriv(Activation act, double a) {
    if (act == Activation::tanh) return 1.0 - a * a;
    return a * (1.0 - a);
}

std::vector<double> hidden_values(const ClassifierState& s, const std::vector<double>& x) {
    std::vector<double> hid(s.hidden);
    for (int h = 0; h < s.hidden; ++h) {
        const double* row = &s.v1[static_cast<std::size_t>(h) * s.input_dim];
        double acc = s.b1[h];
        for (int j = 0; j < s.input_dim; ++j) acc += row[j] * x[j];
        hid[h] = activate(s.act, acc);
    }
    return hid;
}

}  // namespace

ClassifierState init_classifier(int input_dim, int hidden, int t, Activation act,
                                std::uint64_t seed) {
    if (input_dim < 1 || hidden < 1 || t < 1)
        throw ArgumentError("init_classifier: dimensions must be >= 1");
    ClassifierState s;
    s.input_dim = input_dim;
    s.hidden = hidden;
    s.t = t;
    s.act = act;
    std::mt19937_64 rng(substream(seed, SeedRole::classifier_init));
    const double a1 = 1.0 / std::sqrt(double(input_dim));
    const double a2 = 1.0 / std::sqrt(double(hidden));
    std::uniform_real_distribution<double> u1(-a1, a1);
    std::uniform_real_distribution<double> u2(-a2, a2);
    s.v1.resize(static_cast<std::size_t>(hidden) * input_dim);
    for (auto& w : s.v1) w = u1(rng);
    s.b1.assign(hidden, 0.0);
    s.v2.resize(static_cast<std::size_t>(t) * hidden);
    for (auto& w : s.v2) w = u2(rng);
    s.b2.assign(t, 0.0);
    return s;
}

std::vector<double> classifier_forward(const ClassifierState& s, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != s.input_dim)
        throw ArgumentError("classifier_forward: input length mismatch");
    std::vector<double> hid = hidden_values(s, x);
    std::vector<double> out(s.t);
    for (int o = 0; o < s.t; ++o) {
        const double* row = &s.v2[static_cast<std::size_t>(o) * s.hidden];
        double acc = s.b2[o];
        for (int h = 0; h < s.hidden; ++h) acc += row[h] * hid[h];
        out[o] = acc;
    }
    return out;
}

int predict(const ClassifierState& s, const std::vector<double>& x) {
    std::vector<double> out = classifier_forward(s, x);
    int best = 0;
    for (int o = 1; o < s.t; ++o)
        if (out[o] > out[best]) best = o;
    return best;
}

BackpropResult classifier_backward(const ClassifierState& s, const std::vector<double>& x,
                                   const std::vector<double>& target) {
    if (static_cast<int>(x.size()) != s.input_dim)
        throw ArgumentError("classifier_backward: input length mismatch");
    if (static_cast<int>(target.size()) != s.t)
        throw ArgumentError("classifier_backward: target length mismatch");
    int ones = 0;
    for (double v : target) {
        if (v == 1.0)
            ones++;
        else if (v != 0.0)
            throw ArgumentError("classifier_backward: target is not one-hot");
    }
    if (ones != 1) throw ArgumentError("classifier_backward: target is not one-hot");

    std::vector<double> hid = hidden_values(s, x);
    std::vector<double> out(s.t);
    for (int o = 0; o < s.t; ++o) {
        const double* row = &s.v2[static_cast<std::size_t>(o) * s.hidden];
        double acc = s.b2[o];
        for (int h = 0; h < s.hidden; ++h) acc += row[h] * hid[h];
        out[o] = acc;
    }

    BackpropResult r;
    r.loss = 0.0;
    std::vector<double> err(s.t);  // dJ/d(output)
    for (int o = 0; o < s.t; ++o) {
        err[o] = out[o] - target[o];
        r.loss += 0.5 * err[o] * err[o];
    }

    r.gv2.resize(s.v2.size());
    r.gb2 = err;
    for (int o = 0; o < s.t; ++o)
        for (int h = 0; h < s.hidden; ++h)
            r.gv2[static_cast<std::size_t>(o) * s.hidden + h] = err[o] * hid[h];

    // delta1 = -dJ/d(hidden pre-activation)
    r.delta1.assign(s.hidden, 0.0);
    for (int h = 0; h < s.hidden; ++h) {
        double acc = 0.0;
        for (int o = 0; o < s.t; ++o) acc += s.v2[static_cast<std::size_t>(o) * s.hidden + h] * err[o];
        r.delta1[h] = -acc * activate_deriv(s.act, hid[h]);
    }

    r.gv1.resize(s.v1.size());
    r.gb1.resize(s.hidden);
    for (int h = 0; h < s.hidden; ++h) {
        r.gb1[h] = -r.delta1[h];
        for (int j = 0; j < s.input_dim; ++j)
            r.gv1[static_cast<std::size_t>(h) * s.input_dim + j] = -r.delta1[h] * x[j];
    }

    // delta0 = v1^T * delta1 = -dJ/dx
    r.delta0.assign(s.input_dim, 0.0);
    for (int h = 0; h < s.hidden; ++h) {
        const double* row = &s.v1[static_cast<std::size_t>(h) * s.input_dim];
        for (int j = 0; j < s.input_dim; ++j) r.delta0[j] += row[j] * r.delta1[h];
    }
    return r;
}

double sgd_step(ClassifierState& s, const std::vector<TrainPair>& batch, double eta_net) {
    if (batch.empty()) throw ArgumentError("sgd_step: empty batch");
    std::vector<double> gv1(s.v1.size(), 0.0), gb1(s.b1.size(), 0.0);
    std::vector<double> gv2(s.v2.size(), 0.0), gb2(s.b2.size(), 0.0);
    double loss = 0.0;
    for (const auto& pair : batch) {
        BackpropResult r = classifier_backward(s, *pair.h_bar, *pair.target);
        loss += r.loss;
        for (std::size_t i = 0; i < gv1.size(); ++i) gv1[i] += r.gv1[i];
        for (std::size_t i = 0; i < gb1.size(); ++i) gb1[i] += r.gb1[i];
        for (std::size_t i = 0; i < gv2.size(); ++i) gv2[i] += r.gv2[i];
        for (std::size_t i = 0; i < gb2.size(); ++i) gb2[i] += r.gb2[i];
    }
    const double scale = eta_net / double(batch.size());
    for (std::size_t i = 0; i < gv1.size(); ++i) s.v1[i] -= scale * gv1[i];
    for (std::size_t i = 0; i < gb1.size(); ++i) s.b1[i] -= scale * gb1[i];
    for (std::size_t i = 0; i < gv2.size(); ++i) s.v2[i] -= scale * gv2[i];
    for (std::size_t i = 0; i < gb2.size(); ++i) s.b2[i] -= scale * gb2[i];
    return loss / double(batch.size());
}

std::uint64_t checksum(const ClassifierState& s) {
    std::uint64_t h = checksum_doubles(s.v1);
    h = checksum_doubles(s.b1, h);
    h = checksum_doubles(s.v2, h);
    h = checksum_doubles(s.b2, h);
    return h;
}

std::vector<double> one_hot(int label, int t) {
    if (label < 0 || label >= t) throw ArgumentError("one_hot: label out of range");
    std::vector<double> v(t, 0.0);
    v[label] = 1.0;
    return v;
}

}  // namespace poolmaps
