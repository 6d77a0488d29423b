#pragma once

#include "sasaki/errors.hpp"
#include "sasaki/jet.hpp"
#include "sasaki/expr.hpp"
#include "sasaki/manifold.hpp"
#include "sasaki/frame.hpp"
#include "sasaki/sasaki.hpp"
#include "sasaki/mean_curvature.hpp"
#include "sasaki/catalog.hpp"
