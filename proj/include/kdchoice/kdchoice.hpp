#pragma once

// Umbrella header for the (k,d)-choice allocation toolkit.

#include "kdchoice/bounds.hpp"
#include "kdchoice/harness.hpp"
#include "kdchoice/prob.hpp"
#include "kdchoice/process.hpp"
#include "kdchoice/rng.hpp"
#include "kdchoice/stats.hpp"
#include "kdchoice/storage_sim.hpp"
