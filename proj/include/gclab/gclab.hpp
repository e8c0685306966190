#pragma once

#include "gclab/covcheck.hpp"
#include "gclab/empirical.hpp"
#include "gclab/entropy.hpp"
#include "gclab/error.hpp"
#include "gclab/gcip.hpp"
#include "gclab/mixing.hpp"
#include "gclab/procgen.hpp"
#include "gclab/random.hpp"
