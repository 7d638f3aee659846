#pragma once

// Umbrella header for the whole library.

#include "vmr/adam.hpp"
#include "vmr/checkpoint.hpp"
#include "vmr/config.hpp"
#include "vmr/data.hpp"
#include "vmr/errors.hpp"
#include "vmr/gradcheck.hpp"
#include "vmr/graph.hpp"
#include "vmr/heads.hpp"
#include "vmr/io.hpp"
#include "vmr/losses.hpp"
#include "vmr/lstm.hpp"
#include "vmr/matrix.hpp"
#include "vmr/model.hpp"
#include "vmr/params.hpp"
#include "vmr/pipeline.hpp"
#include "vmr/rng.hpp"
#include "vmr/segment.hpp"
#include "vmr/trainer.hpp"
