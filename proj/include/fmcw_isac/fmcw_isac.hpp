#pragma once

#include "fmcw_isac/channel.hpp"
#include "fmcw_isac/config.hpp"
#include "fmcw_isac/constellation.hpp"
#include "fmcw_isac/experiments.hpp"
#include "fmcw_isac/fft.hpp"
#include "fmcw_isac/params.hpp"
#include "fmcw_isac/rx.hpp"
#include "fmcw_isac/seed.hpp"
#include "fmcw_isac/signal.hpp"
#include "fmcw_isac/stats.hpp"
#include "fmcw_isac/txchain.hpp"
