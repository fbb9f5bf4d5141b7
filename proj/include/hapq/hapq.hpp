#ifndef HAPQ_HAPQ_HPP
#define HAPQ_HAPQ_HPP

#include "beam_dynamics.hpp"
#include "channel.hpp"
#include "collection.hpp"
#include "config.hpp"
#include "coupling.hpp"
#include "distribution.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "netsim.hpp"
#include "numerics.hpp"
#include "rng.hpp"
#include "scenario.hpp"
#include "transmittance.hpp"
#include "turbulence.hpp"

#endif  // HAPQ_HAPQ_HPP
