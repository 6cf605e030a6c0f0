#pragma once

#include "bnf.hpp"
#include "coeff.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "multi_index.hpp"
#include "oracle.hpp"
#include "poly.hpp"
#include "potential.hpp"
#include "recovery.hpp"
#include "resonance.hpp"
#include "version.hpp"
