#pragma once

#include <span>

#include "midas/dataset.hpp"
#include "midas/sample_set.hpp"
#include "midas/targets.hpp"

namespace midas {

// Bayesian logistic regression posterior over theta = (w, s) with s = log
// beta, beta the Gaussian prior precision:
//
//   beta        ~ Gamma(a, rate b)
//   w | beta    ~ N(0, beta^{-1} I_p)
//   label c | z ~ P(c | z, w) = sigmoid(c w.z)
//
// log f_u(theta) = sum_i log sigmoid(c_i w.z_i)
//                + a log b + a s - b e^s - lgamma(a)     (prior on s)
//                - (p/2) log 2pi + (p/2) s - e^s |w|^2/2 (prior on w)
//
// The log-beta parameterization keeps the support on all of R^{p+1}, so
// kernel perturbations never leave it; the "+ a s" term already contains
// the e^s Jacobian. For s large enough to overflow e^s the density is
// reported as -inf rather than NaN.
TargetDensity logistic_posterior(const LabeledDataset& data, double prior_a,
                                 double prior_b);

// Exploration density used with the posterior: Student t, 3 degrees of
// freedom, centered at 0 with diagonal shape 25 I.
ExplorationDensity logistic_exploration(int dim);

// Posterior predictive P(c = +1 | z): the self-normalized weighted average
// of sigmoid(w_i.z) over the particles (only the w block of each particle
// enters; the precision coordinate does not).
double posterior_predict(const WeightedSampleSet& particles,
                         std::span<const double> z);

// Fraction of test rows whose thresholded posterior_predict matches the
// label. Probability exactly 1/2 predicts +1.
double predictive_accuracy(const WeightedSampleSet& particles,
                           const LabeledDataset& test);

// Numerically stable log(sigmoid(t)).
double log_sigmoid(double t);

}  // namespace midas
