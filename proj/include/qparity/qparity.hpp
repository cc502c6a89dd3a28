#pragma once

#include "qparity/decomposition.hpp"
#include "qparity/energy_game.hpp"
#include "qparity/energy_parity.hpp"
#include "qparity/io.hpp"
#include "qparity/linear.hpp"
#include "qparity/meanpayoff.hpp"
#include "qparity/model.hpp"
#include "qparity/mp_parity.hpp"
#include "qparity/oracle.hpp"
#include "qparity/rational.hpp"
#include "qparity/simulate.hpp"
#include "qparity/strategy.hpp"
#include "qparity/transform.hpp"
