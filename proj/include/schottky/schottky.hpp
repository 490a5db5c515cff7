#pragma once

#include "schottky/error.hpp"
#include "schottky/forms.hpp"
#include "schottky/kernel.hpp"
#include "schottky/parallel.hpp"
#include "schottky/schottky_core.hpp"
#include "schottky/variational.hpp"
#include "schottky/voa_correlators.hpp"
#include "schottky/zhu_matrix.hpp"
