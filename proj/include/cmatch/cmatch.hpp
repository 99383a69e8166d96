#ifndef CMATCH_CMATCH_HPP
#define CMATCH_CMATCH_HPP

#include "market.hpp"
#include "mechanisms.hpp"
#include "parse.hpp"
#include "report.hpp"
#include "stability.hpp"
#include "strategy.hpp"

#endif  // CMATCH_CMATCH_HPP
