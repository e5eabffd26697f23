#pragma once

#include "hopflab/collocation.hpp"
#include "hopflab/dual.hpp"
#include "hopflab/energetics.hpp"
#include "hopflab/flow.hpp"
#include "hopflab/forms.hpp"
#include "hopflab/geometry.hpp"
#include "hopflab/maps.hpp"
#include "hopflab/poly.hpp"
#include "hopflab/quadrature.hpp"
#include "hopflab/spectral.hpp"
