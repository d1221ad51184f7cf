#pragma once

#include "hypograph/bench.hpp"
#include "hypograph/config.hpp"
#include "hypograph/error.hpp"
#include "hypograph/exact_diffusion.hpp"
#include "hypograph/graph.hpp"
#include "hypograph/layer.hpp"
#include "hypograph/lowrank_diffusion.hpp"
#include "hypograph/matrix.hpp"
#include "hypograph/oracle_check.hpp"
#include "hypograph/random.hpp"
#include "hypograph/sparse.hpp"
#include "hypograph/tensor_algebra.hpp"
#include "hypograph/tu_dataset.hpp"
