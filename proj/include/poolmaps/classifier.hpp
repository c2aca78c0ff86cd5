#ifndef POOLMAPS_CLASSIFIER_HPP
#define POOLMAPS_CLASSIFIER_HPP

#include <cstdint>
#include <vector>

namespace poolmaps {

enum class Activation { sigmoid, tanh };

// Single-hidden-layer network: hidden = act(v1*x + b1), outputs = v2*hidden + b2
// (the output layer is linear). Trained against one-hot targets with
// J = 1/2 * sum (output - target)^2.
struct ClassifierState {
    int input_dim = 0;
    int hidden = 0;
    int t = 0;
    Activation act = Activation::sigmoid;
    std::vector<double> v1;  // hidden x input_dim, row-major
    std::vector<double> b1;  // hidden
    std::vector<double> v2;  // t x hidden, row-major
    std::vector<double> b2;  // t
};

// Loss, exact parameter gradients (dJ/d*), and the sensitivities. delta1 is
// the negative loss gradient at the hidden pre-activation; delta0 = v1^T *
// delta1 is the negative loss gradient at the network input.
struct BackpropResult {
    double loss = 0.0;
    std::vector<double> gv1, gb1, gv2, gb2;
    std::vector<double> delta1;
    std::vector<double> delta0;
};

// Weights uniform in [-a, a] with a = 1/sqrt(fan-in); biases zero.
ClassifierState init_classifier(int input_dim, int hidden, int t, Activation act,
                                std::uint64_t seed);

std::vector<double> classifier_forward(const ClassifierState& state,
                                       const std::vector<double>& h_bar);

// Argmax prediction; ties break toward the lowest class index.
int predict(const ClassifierState& state, const std::vector<double>& h_bar);

BackpropResult classifier_backward(const ClassifierState& state, const std::vector<double>& h_bar,
                                   const std::vector<double>& target);

struct TrainPair {
    const std::vector<double>* h_bar;
    const std::vector<double>* target;
};

// One step of averaged mini-batch gradient descent:
// params -= eta_net * mean(gradients over batch). Returns the mean loss.
double sgd_step(ClassifierState& state, const std::vector<TrainPair>& batch, double eta_net);

std::uint64_t checksum(const ClassifierState& state);

std::vector<double> one_hot(int label, int t);

}  // namespace poolmaps

#endif
