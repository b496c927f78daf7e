#pragma once

#include "turmoil/csv.hpp"
#include "turmoil/diagnostics.hpp"
#include "turmoil/egarch_m.hpp"
#include "turmoil/error.hpp"
#include "turmoil/gnd.hpp"
#include "turmoil/mgnd_em.hpp"
#include "turmoil/pipeline.hpp"
#include "turmoil/returns.hpp"
