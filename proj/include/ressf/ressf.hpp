#pragma once

#include "ressf/errors.hpp"
#include "ressf/linalg.hpp"
#include "ressf/quadrature.hpp"
#include "ressf/contour.hpp"
#include "ressf/model.hpp"
#include "ressf/transfer.hpp"
#include "ressf/residue.hpp"
#include "ressf/oracles.hpp"
#include "ressf/poles.hpp"
#include "ressf/ssf.hpp"
#include "ressf/cantor.hpp"
#include "ressf/random_model.hpp"
#include "ressf/io.hpp"
#include "ressf/scan.hpp"
