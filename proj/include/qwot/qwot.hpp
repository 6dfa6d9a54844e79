#pragma once

#include "qwot/bloch.hpp"
#include "qwot/campaign.hpp"
#include "qwot/eig.hpp"
#include "qwot/embedding.hpp"
#include "qwot/errors.hpp"
#include "qwot/info_measures.hpp"
#include "qwot/json_io.hpp"
#include "qwot/matrix.hpp"
#include "qwot/random.hpp"
#include "qwot/solver.hpp"
#include "qwot/state.hpp"
#include "qwot/wasserstein.hpp"
