#pragma once

// Convenience header for the evidential reasoning core (no HTTP dependency).

#include "horizon/belief.hpp"
#include "horizon/compat.hpp"
#include "horizon/engine.hpp"
#include "horizon/error.hpp"
#include "horizon/evidence_ops.hpp"
#include "horizon/explain.hpp"
#include "horizon/json_io.hpp"
#include "horizon/kb_store.hpp"
#include "horizon/subset.hpp"
