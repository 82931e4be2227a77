#pragma once

#include "autodiff.hpp"
#include "chain.hpp"
#include "confining.hpp"
#include "config.hpp"
#include "continuum.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "lagexp.hpp"
#include "lattice.hpp"
#include "perturbation.hpp"
#include "reductions.hpp"
#include "stencil.hpp"
#include "travelwave.hpp"
