#pragma once

#include "ghzalign/density_matrix.hpp"
#include "ghzalign/errors.hpp"
#include "ghzalign/estimation.hpp"
#include "ghzalign/noise.hpp"
#include "ghzalign/optimizer.hpp"
#include "ghzalign/qfi.hpp"
#include "ghzalign/rng.hpp"
#include "ghzalign/spin_algebra.hpp"
#include "ghzalign/version.hpp"
