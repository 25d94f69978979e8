#pragma once

#include "nomamec/error.hpp"
#include "nomamec/params.hpp"
#include "nomamec/rng.hpp"
#include "nomamec/channel.hpp"
#include "nomamec/two_bs.hpp"
#include "nomamec/association.hpp"
#include "nomamec/deployment.hpp"
#include "nomamec/oracle.hpp"
#include "nomamec/experiments.hpp"
#include "nomamec/verify.hpp"
#include "nomamec/csv.hpp"
#include "nomamec/config.hpp"
