#ifndef OPTEN_ALL_HPP
#define OPTEN_ALL_HPP

#include "opten/core.hpp"
#include "opten/elastic_net.hpp"
#include "opten/io.hpp"
#include "opten/loss.hpp"
#include "opten/metrics.hpp"
#include "opten/opten_search.hpp"
#include "opten/rules.hpp"
#include "opten/subspace.hpp"
#include "opten/synth.hpp"
#include "opten/wavelet.hpp"

#endif  // OPTEN_ALL_HPP
