#pragma once

#include "entrogd/analytics.hpp"
#include "entrogd/archive.hpp"
#include "entrogd/basetree.hpp"
#include "entrogd/bitio.hpp"
#include "entrogd/bitmatrix.hpp"
#include "entrogd/codec.hpp"
#include "entrogd/error.hpp"
#include "entrogd/selection.hpp"
