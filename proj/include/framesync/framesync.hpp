#pragma once

#include "framesync/affine.hpp"
#include "framesync/block_matrix.hpp"
#include "framesync/distributed.hpp"
#include "framesync/errors.hpp"
#include "framesync/experiment.hpp"
#include "framesync/gauss_newton.hpp"
#include "framesync/gradient_flow.hpp"
#include "framesync/graph.hpp"
#include "framesync/instance.hpp"
#include "framesync/io.hpp"
#include "framesync/rng.hpp"
#include "framesync/solution.hpp"
#include "framesync/spectral.hpp"
#include "framesync/sync_direct.hpp"
#include "framesync/transforms.hpp"
