#pragma once

// Umbrella header for the whole library.

#include "crgeom/error.hpp"
#include "crgeom/expr.hpp"
#include "crgeom/parser.hpp"
#include "crgeom/tape.hpp"
#include "crgeom/linalg.hpp"
#include "crgeom/jets.hpp"
#include "crgeom/hypersurface.hpp"
#include "crgeom/immersion.hpp"
#include "crgeom/quadrature.hpp"
#include "crgeom/spectral.hpp"
#include "crgeom/gallery.hpp"
#include "crgeom/analysis.hpp"
#include "crgeom/oracle.hpp"
#include "crgeom/checks.hpp"
#include "crgeom/report.hpp"
