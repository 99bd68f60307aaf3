//! Messages, their wire form, and performative dispatch.

mod dispatch;
mod message;

pub use dispatch::{
    deliver, dispatch, error_content, is_acknowledgement, make_default_dispatch, reply_performative,
    ACTIVATE_BROADCAST, DEFAULT_DISPATCH, DISPATCH_BINDING, LEARN_BROADCAST_CODE,
};
pub use message::{decode, encode, MalformedMessage, Message};
