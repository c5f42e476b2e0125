//! Random protocol messages for codec properties.

use mdwp::*;
use proptest::prelude::*;

pub fn name() -> impl Strategy<Value = String> {
    "[A-Za-z_][A-Za-z0-9_]{0,8}"
}

pub fn text() -> impl Strategy<Value = String> {
    any::<String>()
}

pub fn value() -> impl Strategy<Value = WireValue> {
    prop_oneof![
        any::<i64>().prop_map(WireValue::Int),
        any::<f64>()
            .prop_filter("finite", |r| r.is_finite())
            .prop_map(WireValue::Real),
        any::<bool>().prop_map(WireValue::Bool),
        text().prop_map(WireValue::Str),
        Just(WireValue::Null),
        (any::<u64>(), name()).prop_map(|(id, class)| WireValue::Ref { id, class }),
        any::<u64>().prop_map(|id| WireValue::Seq { id }),
    ]
}

pub fn values() -> impl Strategy<Value = Vec<WireValue>> {
    prop::collection::vec(value(), 0..4)
}

pub fn method_event(exit: bool) -> impl Strategy<Value = MethodEvent> {
    (
        any::<u64>(),
        name(),
        name(),
        prop::option::of(any::<u64>()),
        values(),
        (name(), name(), any::<u32>()),
        value(),
    )
        .prop_map(
            move |(frame_id, class, method, this_id, args, caller, ret)| MethodEvent {
                frame_id,
                class,
                method,
                this_id,
                args,
                caller_class: caller.0,
                caller_method: caller.1,
                caller_line: caller.2,
                return_value: exit.then_some(ret),
            },
        )
}

pub fn event() -> impl Strategy<Value = Event> {
    prop_oneof![
        Just(Event::VmStart),
        method_event(false).prop_map(Event::MethodEntry),
        method_event(true).prop_map(Event::MethodExit),
        (any::<i32>(), any::<u64>(), prop::option::of(text())).prop_map(
            |(exit_status, entry_count, error)| Event::VmDeath {
                exit_status,
                entry_count,
                error
            }
        ),
    ]
}

pub fn error_code() -> impl Strategy<Value = ErrorCode> {
    prop_oneof![
        Just(ErrorCode::NotSuspended),
        Just(ErrorCode::UnknownObject),
        Just(ErrorCode::UnknownClass),
        Just(ErrorCode::UnknownMethod),
        Just(ErrorCode::UnknownField),
        Just(ErrorCode::Purity),
        Just(ErrorCode::Arity),
        Just(ErrorCode::UnknownType),
        Just(ErrorCode::TargetException),
    ]
}

pub fn class_info() -> impl Strategy<Value = ClassInfoBody> {
    let vis = prop::sample::select(vec!["public", "private"]).prop_map(String::from);
    let field = (name(), vis.clone()).prop_map(|(name, visibility)| FieldInfo { name, visibility });
    let method = (
        name(),
        prop::collection::vec(name(), 0..3),
        any::<bool>(),
        vis,
        name(),
    )
        .prop_map(|(name, params, pure, visibility, declaring)| MethodInfo {
            name,
            params,
            pure,
            visibility,
            declaring,
        });
    (
        name(),
        prop::option::of(name()),
        prop::collection::vec(name(), 0..3),
        prop::collection::vec(field, 0..4),
        prop::collection::vec(method, 0..4),
        any::<bool>(),
    )
        .prop_map(
            |(name, base, interfaces, fields, methods, is_interface)| ClassInfoBody {
                name,
                base,
                interfaces,
                fields,
                methods,
                is_interface,
            },
        )
}

pub fn command() -> impl Strategy<Value = Payload> {
    prop_oneof![
        Just(Payload::ListClasses),
        name().prop_map(|class| Payload::ClassInfo { class }),
        (
            prop::collection::vec(name(), 0..4),
            any::<bool>(),
            any::<bool>()
        )
            .prop_map(|(classes, entry, exit)| Payload::SetEventPolicy {
                classes,
                entry,
                exit
            }),
        Just(Payload::Resume),
        Just(Payload::Suspend),
        (any::<u64>(), name()).prop_map(|(obj_id, field)| Payload::ReadField { obj_id, field }),
        any::<u64>().prop_map(|seq_id| Payload::ReadSeq { seq_id }),
        (any::<u64>(), name(), values()).prop_map(|(obj_id, method, args)| {
            Payload::InvokeMethod {
                obj_id,
                method,
                args,
            }
        }),
        Just(Payload::HeapDigest),
        Just(Payload::Disconnect),
    ]
}

pub fn reply() -> impl Strategy<Value = Payload> {
    prop_oneof![
        Just(Payload::Ok),
        (error_code(), text()).prop_map(|(code, msg)| Payload::Error { code, msg }),
        prop::collection::vec(name(), 0..5).prop_map(|classes| Payload::ClassList { classes }),
        class_info().prop_map(Payload::ClassInfoReply),
        value().prop_map(|value| Payload::ValueReply { value }),
        values().prop_map(|elements| Payload::SeqReply { elements }),
        "[0-9a-f]{16}".prop_map(|hex64| Payload::DigestReply { hex64 }),
    ]
}

pub fn message() -> impl Strategy<Value = Message> {
    prop_oneof![
        (1u64..u64::MAX, command()).prop_map(|(id, p)| Message::new(Some(id), p)),
        (1u64..u64::MAX, reply()).prop_map(|(id, p)| Message::new(Some(id), p)),
        (any::<bool>(), prop::collection::vec(event(), 1..4))
            .prop_map(|(suspend, events)| Message::event_set(EventSet { suspend, events })),
    ]
}
