// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "shortpkt/baseline_tx.hpp"
#include "shortpkt/bcjr.hpp"
#include "shortpkt/chansim.hpp"
#include "shortpkt/common.hpp"
#include "shortpkt/config.hpp"
#include "shortpkt/detector.hpp"
#include "shortpkt/io.hpp"
#include "shortpkt/ldpc.hpp"
#include "shortpkt/metrics.hpp"
#include "shortpkt/min_sum.hpp"
#include "shortpkt/nr_bg2_table.hpp"
#include "shortpkt/papr.hpp"
#include "shortpkt/random.hpp"
#include "shortpkt/receiver.hpp"
