#pragma once

#include "rlnc/adversary.hpp"
#include "rlnc/analysis.hpp"
#include "rlnc/arith.hpp"
#include "rlnc/coding.hpp"
#include "rlnc/comm.hpp"
#include "rlnc/error.hpp"
#include "rlnc/field.hpp"
#include "rlnc/flooding.hpp"
#include "rlnc/harness/config.hpp"
#include "rlnc/harness/experiment.hpp"
#include "rlnc/harness/output.hpp"
#include "rlnc/harness/validate.hpp"
#include "rlnc/metrics.hpp"
#include "rlnc/network.hpp"
#include "rlnc/random.hpp"
#include "rlnc/tracker.hpp"
