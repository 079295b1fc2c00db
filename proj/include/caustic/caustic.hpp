#pragma once

// Everything except the file formats and the command line, which need the
// vendored JSON and CLI11 headers (io.hpp, cli.hpp).

#include "billiard.hpp"
#include "curve.hpp"
#include "errors.hpp"
#include "lazutkin.hpp"
#include "periodic.hpp"
#include "presets.hpp"
#include "series.hpp"
#include "solver.hpp"
#include "verify.hpp"
