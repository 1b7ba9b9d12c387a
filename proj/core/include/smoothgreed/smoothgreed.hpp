#pragma once

#include "smoothgreed/cones.hpp"
#include "smoothgreed/instances.hpp"
#include "smoothgreed/objectives.hpp"
#include "smoothgreed/online.hpp"
#include "smoothgreed/rng.hpp"
#include "smoothgreed/scalar_fun.hpp"
#include "smoothgreed/smoothed_scalar.hpp"
#include "smoothgreed/smoothing.hpp"
