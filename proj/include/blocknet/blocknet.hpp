// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "bench.hpp"
#include "comparators.hpp"
#include "executor.hpp"
#include "hybrid.hpp"
#include "key_io.hpp"
#include "network.hpp"
#include "verification.hpp"
