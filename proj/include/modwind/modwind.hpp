#pragma once

#include "modwind/cfcore.hpp"
#include "modwind/error.hpp"
#include "modwind/invariants.hpp"
#include "modwind/io.hpp"
#include "modwind/necklace.hpp"
#include "modwind/pipeline.hpp"
#include "modwind/real.hpp"
#include "modwind/stats.hpp"
#include "modwind/verify.hpp"
