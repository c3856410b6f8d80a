#pragma once

#include "qkernel/error.hpp"
#include "qkernel/experiments.hpp"
#include "qkernel/kernel.hpp"
#include "qkernel/matrix.hpp"
#include "qkernel/quantized_io.hpp"
#include "qkernel/quantizers.hpp"
#include "qkernel/synth.hpp"
#include "qkernel/tensor_io.hpp"
