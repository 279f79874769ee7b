#pragma once

#include <sic/bench.hpp>
#include <sic/cancelers/grid.hpp>
#include <sic/cancelers/linear.hpp>
#include <sic/cancelers/poly.hpp>
#include <sic/cancelers/stack.hpp>
#include <sic/cancelers/train.hpp>
#include <sic/cxnum.hpp>
#include <sic/dataset_io.hpp>
#include <sic/digest.hpp>
#include <sic/errors.hpp>
#include <sic/flops.hpp>
#include <sic/model_io.hpp>
#include <sic/poly_terms.hpp>
#include <sic/rng.hpp>
#include <sic/txchain.hpp>
