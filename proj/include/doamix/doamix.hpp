// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "doamix/array.hpp"
#include "doamix/common.hpp"
#include "doamix/config.hpp"
#include "doamix/covariance.hpp"
#include "doamix/crlb.hpp"
#include "doamix/energy.hpp"
#include "doamix/estimators.hpp"
#include "doamix/harness.hpp"
#include "doamix/quantizer.hpp"
#include "doamix/rng.hpp"
