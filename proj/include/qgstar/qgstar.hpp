#pragma once

#include "qgstar/error.hpp"
#include "qgstar/coupling.hpp"
#include "qgstar/schedule.hpp"
#include "qgstar/kernels.hpp"
#include "qgstar/stargraph.hpp"
#include "qgstar/oracle.hpp"
#include "qgstar/convergence.hpp"
#include "qgstar/verify.hpp"
