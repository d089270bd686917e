#pragma once

#include "nongauss/channel.hpp"
#include "nongauss/convolve.hpp"
#include "nongauss/distribution.hpp"
#include "nongauss/entropy.hpp"
#include "nongauss/error.hpp"
#include "nongauss/grid.hpp"
#include "nongauss/monte_carlo.hpp"
#include "nongauss/taylor.hpp"
#include "nongauss/theorem1.hpp"
